#pragma once

#include <functional>
#include <span>
#include <string_view>
#include <vector>

#include "gabo/autodiff/optim.hpp"
#include "gabo/common/random.hpp"
#include "gabo/autodiff/tensor.hpp"
#include "gabo/train/bilevel.hpp"

namespace gabo::train {

enum class AscentRule { sign, normalized };

std::string_view to_string(AscentRule rule);
AscentRule parse_ascent_rule(std::string_view s);

struct FlagConfig {
  std::size_t steps = 3;  // M
  double step_size = 1e-3;  // alpha
  AscentRule rule = AscentRule::sign;
};

/// Loss of the model at parameters omega with perturbation delta added to the
/// node embeddings.
using PerturbedLossFn = std::function<Tensor(std::span<const Tensor> omega, const Tensor& delta)>;

/// delta + alpha * ascent(grad). The normalized rule scales each row of the
/// gradient to unit L2 norm (zero rows stay zero).
Tensor ascend(const Tensor& delta, const Tensor& grad, double alpha, AscentRule rule);

struct FlagTrace {
  std::vector<double> losses;  // loss at delta_0 .. delta_{M-1}
  std::vector<Tensor> omega_grad;  // mean over the M rounds
  Tensor delta_final;  // delta_M
};

/// M ascent rounds from delta0 with the gradients w.r.t. omega accumulated
/// and averaged. delta is never projected.
FlagTrace flag_rounds(std::span<const Tensor> omega, const Tensor& delta0, const PerturbedLossFn& loss,
                      const FlagConfig& config);

/// delta0 ~ U[-alpha, alpha], M rounds, then one SGD step with the averaged
/// gradient. Returns the mean round loss.
InnerStepInfo flag_train_step(InnerState& state, const ad::Shape& delta_shape, const PerturbedLossFn& loss,
                              const FlagConfig& config, const ad::SgdHyper& hyper, Rng& rng,
                              std::size_t step_index = 0);

Tensor flag_initial_delta(const ad::Shape& shape, double alpha, Rng& rng);

}  // namespace gabo::train
