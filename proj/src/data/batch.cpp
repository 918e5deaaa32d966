#include "gabo/data/batch.hpp"

#include <stdexcept>

namespace gabo::data {

GraphBatch make_batch(std::span<const MolGraph> graphs, std::span<const std::size_t> indices,
                      const std::vector<std::vector<double>>* classic) {
  GraphBatch b;
  b.num_graphs = indices.size();
  b.num_fields = indices.empty() ? kDefaultVocabSizes.size() : graphs[indices[0]].num_fields;
  if (classic) b.classic.emplace();
  std::uint32_t offset = 0;
  for (std::size_t gi = 0; gi < indices.size(); ++gi) {
    const MolGraph& g = graphs[indices[gi]];
    if (g.num_fields != b.num_fields) throw std::invalid_argument("make_batch: graphs disagree on node field count");
    b.node_feats.insert(b.node_feats.end(), g.node_feats.begin(), g.node_feats.end());
    for (const auto& [u, v] : g.edges) {
      b.edge_src.push_back(offset + u);
      b.edge_dst.push_back(offset + v);
    }
    b.membership.insert(b.membership.end(), g.num_nodes, static_cast<std::uint32_t>(gi));
    b.node_counts.push_back(g.num_nodes);
    b.labels.push_back(g.label);
    if (classic) {
      const auto& feats = (*classic)[indices[gi]];
      if (feats.size() != g.num_nodes * 4) throw std::invalid_argument("make_batch: classic feature cache has wrong size");
      b.classic->insert(b.classic->end(), feats.begin(), feats.end());
    }
    offset += static_cast<std::uint32_t>(g.num_nodes);
  }
  b.num_nodes = offset;
  return b;
}

std::vector<std::vector<std::size_t>> chunk(std::span<const std::size_t> indices, std::size_t batch_size) {
  if (batch_size == 0) throw std::invalid_argument("chunk: batch size must be positive");
  std::vector<std::vector<std::size_t>> out;
  for (std::size_t i = 0; i < indices.size(); i += batch_size) {
    const auto end = std::min(indices.size(), i + batch_size);
    out.emplace_back(indices.begin() + static_cast<std::ptrdiff_t>(i), indices.begin() + static_cast<std::ptrdiff_t>(end));
  }
  return out;
}

}  // namespace gabo::data
