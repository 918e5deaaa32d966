#pragma once

#include <functional>
#include <span>
#include <vector>

#include "gabo/autodiff/ops.hpp"
#include "gabo/data/batch.hpp"
#include "gabo/models/params.hpp"

namespace gabo::models {

using ad::Index;

struct ClassifierConfig {
  std::vector<int> vocab_sizes;
  std::size_t dim = 256;
  std::size_t layers = 5;
  double gin_eps = 0.0;
  bool train_eps = false;
};

using MlpFn = std::function<Tensor(const Tensor&)>;

/// Sum over fields of table_k[code_{i,k}]. Throws naming node and field for
/// out-of-vocabulary codes.
Tensor atom_encode(std::span<const Tensor> tables, const data::GraphBatch& batch);

/// (1 + eps) h_v + sum of neighbour rows, then `mlp`. `eps` may be a tracked
/// scalar when it is trained; an undefined tensor means `fixed_eps`.
Tensor gin_layer(const Tensor& h, const Index& src, const Index& dst, const Tensor& eps, double fixed_eps,
                 const MlpFn& mlp);

struct VirtualNodeState {
  Tensor nodes;  // updated node rows
  Tensor vn;     // [num_graphs, d]
};

/// vn' = mlp(vn + per-graph sum of h); each node then receives its graph's vn'.
VirtualNodeState virtual_node_pass(const Tensor& h, const Index& membership, const Tensor& vn, const MlpFn& mlp);

/// Mean over each graph's nodes followed by x W + b; one logit per graph.
Tensor readout_and_head(const Tensor& h, const Index& membership, std::span<const std::size_t> node_counts,
                        const Tensor& weight, const Tensor& bias);

/// linear -> relu -> linear.
Tensor mlp2(const Tensor& x, const Tensor& w1, const Tensor& b1, const Tensor& w2, const Tensor& b2);

/// Optional rewrite of the atom embeddings before message passing.
using NodeTransform = std::function<Tensor(const Tensor&)>;

/// GIN with a virtual node. Parameter layout (see `init`): nine atom tables,
/// then per layer {w1, b1, w2, b2[, eps]}, then per virtual-node update
/// {w1, b1, w2, b2}, then vn.init, head.w, head.b.
class Classifier {
 public:
  explicit Classifier(ClassifierConfig config);

  const ClassifierConfig& config() const { return config_; }
  ParamSet init(Rng& rng) const;

  Tensor encode(std::span<const Tensor> params, const data::GraphBatch& batch) const;
  /// Message passing, pooling and head applied to given initial node rows.
  Tensor logits_from(std::span<const Tensor> params, const data::GraphBatch& batch, const Tensor& h0) const;
  Tensor forward(std::span<const Tensor> params, const data::GraphBatch& batch,
                 const NodeTransform& transform = nullptr) const;

 private:
  ClassifierConfig config_;
  std::size_t per_layer_;
  std::size_t gin_offset_, vn_offset_, vn_init_, head_w_, head_b_;
};

/// Mean binary cross-entropy on logits, softplus(x) - y x.
Tensor bce_loss(const Tensor& logits, std::span<const int> labels);

/// Rank statistic P(score_pos > score_neg) + 0.5 P(tie). Throws when either
/// class is absent.
double roc_auc(std::span<const double> scores, std::span<const int> labels);

}  // namespace gabo::models
