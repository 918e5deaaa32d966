#include "gabo/data/graph.hpp"

#include <string>

namespace gabo::data {

void add_edge(MolGraph& g, std::uint32_t u, std::uint32_t v) {
  g.edges.emplace_back(u, v);
  g.edges.emplace_back(v, u);
}

void validate(const MolGraph& g, const Vocab& vocab) {
  if (g.num_fields != vocab.num_fields()) {
    throw DataError("graph has " + std::to_string(g.num_fields) + " node fields, vocabulary declares " +
                    std::to_string(vocab.num_fields()));
  }
  if (g.node_feats.size() != g.num_nodes * g.num_fields) {
    throw DataError("node feature table has " + std::to_string(g.node_feats.size()) + " entries, expected " +
                    std::to_string(g.num_nodes * g.num_fields));
  }
  for (std::size_t i = 0; i < g.num_nodes; ++i) {
    for (std::size_t k = 0; k < g.num_fields; ++k) {
      const int code = g.feat(i, k);
      if (code < 0 || code >= vocab.sizes[k]) {
        throw DataError("node " + std::to_string(i) + " field " + std::to_string(k) + " has code " +
                        std::to_string(code) + " outside vocabulary of size " + std::to_string(vocab.sizes[k]));
      }
    }
  }
  if (g.edges.size() % 2 != 0) throw DataError("edge list is not closed under reversal");
  for (std::size_t e = 0; e < g.edges.size(); e += 2) {
    const auto [u, v] = g.edges[e];
    if (u >= g.num_nodes || v >= g.num_nodes) {
      throw DataError("edge (" + std::to_string(u) + ", " + std::to_string(v) + ") has an endpoint >= " +
                      std::to_string(g.num_nodes) + " nodes");
    }
    if (u == v) throw DataError("self-loop at node " + std::to_string(u));
    if (g.edges[e + 1] != std::make_pair(v, u)) throw DataError("edge list is not closed under reversal");
  }
  if (g.label != 0 && g.label != 1) throw DataError("label " + std::to_string(g.label) + " is not 0 or 1");
}

std::vector<std::vector<std::uint32_t>> adjacency(const MolGraph& g) {
  std::vector<std::vector<std::uint32_t>> adj(g.num_nodes);
  for (const auto& [u, v] : g.edges) adj[u].push_back(v);
  return adj;
}

}  // namespace gabo::data
