#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace gabo::data {

/// Cardinalities of the nine categorical atom fields used by ogbg-mol*
/// datasets: atomic number, chirality, degree, formal charge, #H, radical
/// electrons, hybridisation, aromaticity, ring membership.
inline const std::vector<int> kDefaultVocabSizes{119, 5, 12, 12, 10, 6, 6, 2, 2};

struct Vocab {
  std::vector<int> sizes = kDefaultVocabSizes;

  std::size_t num_fields() const { return sizes.size(); }
  bool operator==(const Vocab&) const = default;
};

/// Node-featured undirected graph with a binary label. `edges` stores every
/// undirected edge in both directions: entries 2k and 2k+1 are (u, v) and
/// (v, u).
struct MolGraph {
  std::size_t num_nodes = 0;
  std::size_t num_fields = 9;
  std::vector<int> node_feats;  // num_nodes x num_fields, row-major
  std::vector<std::pair<std::uint32_t, std::uint32_t>> edges;
  int label = 0;
  std::optional<std::int64_t> scaffold_id;

  int feat(std::size_t node, std::size_t field) const { return node_feats[node * num_fields + field]; }
  std::size_t num_undirected_edges() const { return edges.size() / 2; }

  bool operator==(const MolGraph&) const = default;
};

struct Dataset {
  Vocab vocab;
  std::vector<MolGraph> graphs;
};

class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Adds an undirected edge in both directions.
void add_edge(MolGraph& g, std::uint32_t u, std::uint32_t v);

/// Throws DataError describing the first invariant violation.
void validate(const MolGraph& g, const Vocab& vocab);

/// Neighbour lists built from the directed edge entries.
std::vector<std::vector<std::uint32_t>> adjacency(const MolGraph& g);

}  // namespace gabo::data
