#include "gabo/train/flag.hpp"

#include <cmath>
#include <sstream>
#include <string>

#include "gabo/autodiff/ops.hpp"

namespace gabo::train {

using namespace gabo::ad;

std::string_view to_string(AscentRule rule) { return rule == AscentRule::sign ? "sign" : "normalized"; }

AscentRule parse_ascent_rule(std::string_view s) {
  if (s == "sign") return AscentRule::sign;
  if (s == "normalized") return AscentRule::normalized;
  throw std::invalid_argument("unknown ascent rule '" + std::string(s) + "' (sign, normalized)");
}

Tensor ascend(const Tensor& delta, const Tensor& grad, double alpha, AscentRule rule) {
  if (delta.shape() != grad.shape()) throw ShapeError("ascend: delta and gradient shapes differ");
  auto d = delta.to_vector();
  const auto g = grad.values();
  if (rule == AscentRule::sign) {
    for (std::size_t i = 0; i < d.size(); ++i) d[i] += alpha * static_cast<double>((g[i] > 0) - (g[i] < 0));
  } else {
    const auto rows = grad.rows(), cols = grad.size() / std::max<std::size_t>(rows, 1);
    for (std::size_t r = 0; r < rows; ++r) {
      double sq = 0.0;
      for (std::size_t c = 0; c < cols; ++c) sq += g[r * cols + c] * g[r * cols + c];
      if (sq == 0.0) continue;
      const double inv = alpha / std::sqrt(sq);
      for (std::size_t c = 0; c < cols; ++c) d[r * cols + c] += inv * g[r * cols + c];
    }
  }
  for (double x : d) {
    if (!std::isfinite(x)) throw std::domain_error("ascend: non-finite perturbation");
  }
  return Tensor(delta.shape(), std::move(d));
}

Tensor flag_initial_delta(const Shape& shape, double alpha, Rng& rng) {
  std::vector<double> v(shape_size(shape));
  for (auto& x : v) x = rng.uniform(-alpha, alpha);
  return Tensor(shape, std::move(v));
}

FlagTrace flag_rounds(std::span<const Tensor> omega, const Tensor& delta0, const PerturbedLossFn& loss,
                      const FlagConfig& config) {
  if (config.steps == 0) throw std::invalid_argument("FLAG: at least one ascent step is required");
  if (config.step_size < 0.0) throw std::invalid_argument("FLAG: step size must be non-negative");
  FlagTrace trace;
  Tensor delta = delta0.detach();
  const double inv_m = 1.0 / static_cast<double>(config.steps);
  for (std::size_t t = 0; t < config.steps; ++t) {
    Tape tape;
    auto w = tape.track(omega);
    auto d = tape.track(delta);
    Tensor l = loss(w, d);
    trace.losses.push_back(l.item());
    auto wrt = w;
    wrt.push_back(d);
    auto g = tape.grad(l, wrt);
    for (std::size_t k = 0; k < w.size(); ++k) {
      Tensor part = config.steps == 1 ? g[k] : scale(g[k], inv_m);
      if (t == 0) {
        trace.omega_grad.push_back(part);
      } else {
        trace.omega_grad[k] = add(trace.omega_grad[k], part);
      }
    }
    delta = ascend(delta, g.back(), config.step_size, config.rule);
  }
  trace.delta_final = delta;
  return trace;
}

InnerStepInfo flag_train_step(InnerState& state, const Shape& delta_shape, const PerturbedLossFn& loss,
                              const FlagConfig& config, const SgdHyper& hyper, Rng& rng, std::size_t step_index) {
  InnerStepInfo info;
  try {
    auto trace = flag_rounds(state.omega, flag_initial_delta(delta_shape, config.step_size, rng), loss, config);
    double total = 0.0;
    for (double l : trace.losses) total += l;
    info.loss = total / static_cast<double>(trace.losses.size());
    info.grad_norm = l2_norm(trace.omega_grad);
    auto r = sgd_momentum_step(state.omega, trace.omega_grad, state.velocity, hyper, false);
    state.omega = std::move(r.params);
    state.velocity = std::move(r.buffers);
  } catch (const std::domain_error& e) {
    std::ostringstream msg;
    msg << "FLAG step " << step_index << ": " << e.what();
    throw TrainingAborted(msg.str());
  }
  return info;
}

}  // namespace gabo::train
