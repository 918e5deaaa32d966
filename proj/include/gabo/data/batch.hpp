#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "gabo/data/graph.hpp"

namespace gabo::data {

/// Disjoint union of graphs with global node numbering.
struct GraphBatch {
  std::size_t num_graphs = 0;
  std::size_t num_nodes = 0;
  std::size_t num_fields = 0;
  std::vector<int> node_feats;             // num_nodes x num_fields
  std::vector<std::uint32_t> edge_src;     // directed edge entries
  std::vector<std::uint32_t> edge_dst;
  std::vector<std::uint32_t> membership;   // node -> graph within the batch
  std::vector<std::size_t> node_counts;    // per graph
  std::vector<int> labels;
  /// Per-node classic features (num_nodes x 4) when a cache was supplied.
  std::optional<std::vector<double>> classic;
};

/// `classic`, when given, holds one flat num_nodes x 4 vector per graph of
/// `graphs` (indexed like `graphs`, not like `indices`).
GraphBatch make_batch(std::span<const MolGraph> graphs, std::span<const std::size_t> indices,
                      const std::vector<std::vector<double>>* classic = nullptr);

/// Splits `indices` into consecutive batches of at most `batch_size`.
std::vector<std::vector<std::size_t>> chunk(std::span<const std::size_t> indices, std::size_t batch_size);

}  // namespace gabo::data
