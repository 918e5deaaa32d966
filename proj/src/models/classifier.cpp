#include "gabo/models/classifier.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>
#include <string>

namespace gabo::models {

using namespace gabo::ad;

Tensor atom_encode(std::span<const Tensor> tables, const data::GraphBatch& batch) {
  if (tables.size() != batch.num_fields) {
    throw std::invalid_argument("atom_encode: " + std::to_string(tables.size()) + " tables for " +
                                std::to_string(batch.num_fields) + " node fields");
  }
  Tensor h;
  Index codes(batch.num_nodes);
  for (std::size_t k = 0; k < tables.size(); ++k) {
    const auto vocab = tables[k].rows();
    for (std::size_t i = 0; i < batch.num_nodes; ++i) {
      const int code = batch.node_feats[i * batch.num_fields + k];
      if (code < 0 || static_cast<std::size_t>(code) >= vocab) {
        throw std::out_of_range("atom_encode: node " + std::to_string(i) + " field " + std::to_string(k) +
                                " code " + std::to_string(code) + " outside vocabulary of size " +
                                std::to_string(vocab));
      }
      codes[i] = static_cast<std::uint32_t>(code);
    }
    Tensor rows = index_select_rows(tables[k], codes);
    h = h.defined() ? add(h, rows) : rows;
  }
  return h;
}

Tensor gin_layer(const Tensor& h, const Index& src, const Index& dst, const Tensor& eps, double fixed_eps,
                 const MlpFn& mlp) {
  Tensor self = eps.defined() ? add(h, mul(broadcast_scalar(eps, h.shape()), h)) : scale(h, 1.0 + fixed_eps);
  Tensor neighbours = scatter_sum_rows(index_select_rows(h, src), dst, h.rows());
  return mlp(add(self, neighbours));
}

VirtualNodeState virtual_node_pass(const Tensor& h, const Index& membership, const Tensor& vn, const MlpFn& mlp) {
  if (membership.size() != h.rows()) {
    throw ShapeError("virtual_node_pass: membership has " + std::to_string(membership.size()) + " entries for " +
                     std::to_string(h.rows()) + " nodes");
  }
  Tensor updated = mlp(add(vn, scatter_sum_rows(h, membership, vn.rows())));
  return {add(h, index_select_rows(updated, membership)), updated};
}

Tensor readout_and_head(const Tensor& h, const Index& membership, std::span<const std::size_t> node_counts,
                        const Tensor& weight, const Tensor& bias) {
  const auto graphs = node_counts.size();
  const auto d = h.cols();
  std::vector<double> inv(graphs * d);
  for (std::size_t g = 0; g < graphs; ++g) {
    if (node_counts[g] == 0) throw std::invalid_argument("readout: graph " + std::to_string(g) + " has no nodes");
    std::fill(inv.begin() + static_cast<std::ptrdiff_t>(g * d), inv.begin() + static_cast<std::ptrdiff_t>((g + 1) * d),
              1.0 / static_cast<double>(node_counts[g]));
  }
  Tensor pooled = mul(scatter_sum_rows(h, membership, graphs), Tensor::matrix(graphs, d, std::move(inv)));
  return reshape(linear(pooled, weight, bias), {graphs});
}

Tensor mlp2(const Tensor& x, const Tensor& w1, const Tensor& b1, const Tensor& w2, const Tensor& b2) {
  return linear(relu(linear(x, w1, b1)), w2, b2);
}

Classifier::Classifier(ClassifierConfig config) : config_(std::move(config)) {
  if (config_.vocab_sizes.empty()) throw std::invalid_argument("Classifier: empty vocabulary");
  if (config_.dim == 0 || config_.layers == 0) throw std::invalid_argument("Classifier: dim and layers must be positive");
  per_layer_ = config_.train_eps ? 5 : 4;
  gin_offset_ = config_.vocab_sizes.size();
  vn_offset_ = gin_offset_ + per_layer_ * config_.layers;
  vn_init_ = vn_offset_ + 4 * (config_.layers - 1);
  head_w_ = vn_init_ + 1;
  head_b_ = head_w_ + 1;
}

ParamSet Classifier::init(Rng& rng) const {
  const auto d = config_.dim;
  ParamSet p;
  for (std::size_t k = 0; k < config_.vocab_sizes.size(); ++k) {
    p.add("atom_emb." + std::to_string(k), xavier_table(rng, static_cast<std::size_t>(config_.vocab_sizes[k]), d));
  }
  for (std::size_t l = 0; l < config_.layers; ++l) {
    const auto prefix = "gin." + std::to_string(l) + ".";
    p.add(prefix + "w1", uniform_weight(rng, d, 2 * d));
    p.add(prefix + "b1", uniform_bias(rng, d, 2 * d));
    p.add(prefix + "w2", uniform_weight(rng, 2 * d, d));
    p.add(prefix + "b2", uniform_bias(rng, 2 * d, d));
    if (config_.train_eps) p.add(prefix + "eps", Tensor::scalar(config_.gin_eps));
  }
  for (std::size_t l = 0; l + 1 < config_.layers; ++l) {
    const auto prefix = "vn." + std::to_string(l) + ".";
    p.add(prefix + "w1", uniform_weight(rng, d, 2 * d));
    p.add(prefix + "b1", uniform_bias(rng, d, 2 * d));
    p.add(prefix + "w2", uniform_weight(rng, 2 * d, d));
    p.add(prefix + "b2", uniform_bias(rng, 2 * d, d));
  }
  p.add("vn.init", Tensor::zeros({d}));
  p.add("head.w", uniform_weight(rng, d, 1));
  p.add("head.b", uniform_bias(rng, d, 1));
  return p;
}

Tensor Classifier::encode(std::span<const Tensor> params, const data::GraphBatch& batch) const {
  return atom_encode(params.subspan(0, gin_offset_), batch);
}

Tensor Classifier::logits_from(std::span<const Tensor> params, const data::GraphBatch& batch, const Tensor& h0) const {
  if (params.size() != head_b_ + 1) {
    throw std::invalid_argument("Classifier: expected " + std::to_string(head_b_ + 1) + " parameter tensors, got " +
                                std::to_string(params.size()));
  }
  const Index& membership = batch.membership;
  Tensor h = h0;
  Tensor vn = broadcast_rows(params[vn_init_], batch.num_graphs);
  for (std::size_t l = 0; l < config_.layers; ++l) {
    const auto* w = &params[gin_offset_ + l * per_layer_];
    Tensor eps = config_.train_eps ? w[4] : Tensor();
    h = gin_layer(h, batch.edge_src, batch.edge_dst, eps, config_.gin_eps,
                  [w](const Tensor& x) { return mlp2(x, w[0], w[1], w[2], w[3]); });
    if (l + 1 == config_.layers) break;
    h = relu(h);
    const auto* v = &params[vn_offset_ + l * 4];
    auto state = virtual_node_pass(h, membership, vn, [v](const Tensor& x) { return mlp2(x, v[0], v[1], v[2], v[3]); });
    h = state.nodes;
    vn = state.vn;
  }
  return readout_and_head(h, membership, batch.node_counts, params[head_w_], params[head_b_]);
}

Tensor Classifier::forward(std::span<const Tensor> params, const data::GraphBatch& batch,
                           const NodeTransform& transform) const {
  Tensor h0 = encode(params, batch);
  if (transform) h0 = transform(h0);
  return logits_from(params, batch, h0);
}

Tensor bce_loss(const Tensor& logits, std::span<const int> labels) {
  if (logits.size() != labels.size()) throw ShapeError("bce_loss: logits and labels differ in length");
  std::vector<double> y(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] != 0 && labels[i] != 1) throw std::invalid_argument("bce_loss: labels must be 0 or 1");
    y[i] = static_cast<double>(labels[i]);
  }
  Tensor target(logits.shape(), std::move(y));
  return mean(sub(softplus(logits), mul(logits, target)));
}

double roc_auc(std::span<const double> scores, std::span<const int> labels) {
  if (scores.size() != labels.size()) throw std::invalid_argument("roc_auc: scores and labels differ in length");
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](auto a, auto b) { return scores[a] < scores[b]; });
  double positives = 0.0, negatives = 0.0, rank_sum = 0.0;
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j < order.size() && scores[order[j]] == scores[order[i]]) ++j;
    // Ranks i+1 .. j share their average (a multiple of 1/2).
    const double avg_rank = static_cast<double>(i + 1 + j) / 2.0;
    for (std::size_t k = i; k < j; ++k) {
      if (labels[order[k]] == 1) {
        positives += 1.0;
        rank_sum += avg_rank;
      } else {
        negatives += 1.0;
      }
    }
    i = j;
  }
  if (positives == 0.0 || negatives == 0.0) throw std::invalid_argument("roc_auc: both classes must be present");
  const double u = rank_sum - positives * (positives + 1.0) / 2.0;
  return u / (positives * negatives);
}

}  // namespace gabo::models
