#pragma once

#include <cstdint>

#include "gabo/data/graph.hpp"

namespace gabo::data {

/// Positive class: some simple cycle of length >= min_ring passes through a
/// node whose atom-type field (field 0) equals `marked_code`.
struct MotifRule {
  int marked_code = 15;
  std::size_t min_ring = 5;
  std::size_t max_ring = 8;
};

struct SynthOptions {
  std::size_t n_graphs = 2000;
  std::size_t min_nodes = 14;
  std::size_t max_nodes = 30;
  MotifRule rule;
  double noise_rate = 0.1;
  std::uint64_t seed = 0;
};

/// Random connected molecule-like graphs over the default nine-field
/// vocabulary. Each graph is a random tree with rings hung off it by single
/// bridge edges, so its cycles are exactly the planted rings. Clean labels are
/// balanced by construction, then flipped with probability `noise_rate`.
/// `scaffold_id` is the index of the generating template (motif variant, ring
/// length, distractor ring).
Dataset synth_motif_dataset(const SynthOptions& options);

}  // namespace gabo::data
