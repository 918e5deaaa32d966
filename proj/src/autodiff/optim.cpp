#include "gabo/autodiff/optim.hpp"

#include <optional>
#include <stdexcept>
#include <string>

#include "gabo/autodiff/ops.hpp"

namespace gabo::ad {

SgdResult sgd_momentum_step(std::span<const Tensor> params, std::span<const Tensor> grads,
                            std::span<const Tensor> buffers, const SgdHyper& hyper, bool tracked) {
  if (!(hyper.lr >= 0.0)) throw std::invalid_argument("sgd_momentum_step: negative learning rate");
  if (!(hyper.momentum >= 0.0 && hyper.momentum < 1.0)) {
    throw std::invalid_argument("sgd_momentum_step: momentum " + std::to_string(hyper.momentum) +
                                " outside [0, 1)");
  }
  if (grads.size() != params.size() || buffers.size() != params.size()) {
    throw std::invalid_argument("sgd_momentum_step: parameter, gradient and buffer lists differ in length");
  }
  std::optional<NoGradGuard> no_grad;
  if (!tracked) no_grad.emplace();

  SgdResult out;
  out.params.reserve(params.size());
  out.buffers.reserve(params.size());
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (grads[i].shape() != params[i].shape() || buffers[i].shape() != params[i].shape()) {
      throw ShapeError("sgd_momentum_step: entry " + std::to_string(i) + " has parameter shape " +
                       shape_str(params[i].shape()) + ", gradient shape " + shape_str(grads[i].shape()) +
                       ", buffer shape " + shape_str(buffers[i].shape()));
    }
    Tensor v = add(scale(buffers[i], hyper.momentum), add(grads[i], scale(params[i], hyper.weight_decay)));
    Tensor p = sub(params[i], scale(v, hyper.lr));
    if (!tracked) {
      v = v.detach();
      p = p.detach();
    }
    out.buffers.push_back(std::move(v));
    out.params.push_back(std::move(p));
  }
  return out;
}

std::vector<Tensor> zero_buffers(std::span<const Tensor> params) {
  std::vector<Tensor> out;
  out.reserve(params.size());
  for (const auto& p : params) out.push_back(Tensor::zeros(p.shape()));
  return out;
}

}  // namespace gabo::ad
