#pragma once

#include <span>
#include <vector>

#include "gabo/autodiff/tensor.hpp"

namespace gabo::ad {

struct SgdHyper {
  double lr = 0.1;
  double momentum = 0.9;
  double weight_decay = 0.0;
};

struct SgdResult {
  std::vector<Tensor> params;
  std::vector<Tensor> buffers;
};

/// One SGD-with-momentum update over parallel lists:
///   v' = momentum * v + (g + weight_decay * p),  p' = p - lr * v'.
/// With `tracked` the update is recorded on the inputs' tape (needed when
/// differentiating through the step); otherwise results are plain values.
/// Both paths evaluate the same arithmetic in the same order.
SgdResult sgd_momentum_step(std::span<const Tensor> params, std::span<const Tensor> grads,
                            std::span<const Tensor> buffers, const SgdHyper& hyper, bool tracked);

/// Zero momentum buffers shaped like `params`.
std::vector<Tensor> zero_buffers(std::span<const Tensor> params);

}  // namespace gabo::ad
