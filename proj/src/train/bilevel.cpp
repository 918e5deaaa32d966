#include "gabo/train/bilevel.hpp"

#include <cmath>
#include <sstream>

#include "gabo/autodiff/ops.hpp"

namespace gabo::train {

using namespace gabo::ad;

namespace {

std::vector<Tensor> concat(std::initializer_list<std::span<const Tensor>> parts) {
  std::vector<Tensor> out;
  for (auto p : parts) out.insert(out.end(), p.begin(), p.end());
  return out;
}

[[noreturn]] void abort_step(const char* where, std::size_t step, const std::string& detail) {
  std::ostringstream msg;
  msg << where << " " << step << ": " << detail;
  throw TrainingAborted(msg.str());
}

}  // namespace

double replay_outer_loss(std::span<const Tensor> omega0, std::span<const Tensor> v0, std::span<const Tensor> theta,
                         std::span<const InnerLossFn> losses, std::span<const SgdHyper> hypers,
                         const OuterLossFn& outer_loss) {
  if (losses.size() != hypers.size()) throw std::invalid_argument("replay_outer_loss: one hyper per step");
  InnerState state{std::vector<Tensor>(omega0.begin(), omega0.end()), std::vector<Tensor>(v0.begin(), v0.end())};
  for (std::size_t i = 0; i < losses.size(); ++i) inner_step(state, theta, losses[i], hypers[i], nullptr, i);
  NoGradGuard no_grad;
  return outer_loss(state.omega).item();
}

double l2_norm(std::span<const Tensor> tensors) {
  double sq = 0.0;
  for (const auto& t : tensors)
    for (double x : t.values()) sq += x * x;
  return std::sqrt(sq);
}

InnerState make_inner_state(std::vector<Tensor> omega) {
  auto v = zero_buffers(omega);
  return {std::move(omega), std::move(v)};
}

UnrollWindow::UnrollWindow(std::size_t capacity) : capacity_(capacity) {
  if (capacity_ == 0) throw std::invalid_argument("UnrollWindow: capacity must be at least 1");
}

void UnrollWindow::push(WindowStep step) {
  if (!steps_.empty()) {
    const auto& last = steps_.back().omega_out;
    for (std::size_t i = 0; i < last.size(); ++i) {
      if (last[i].values().data() != step.omega_in[i].values().data() &&
          last[i].to_vector() != step.omega_in[i].to_vector()) {
        throw std::logic_error("UnrollWindow: steps are not contiguous");
      }
    }
  }
  steps_.push_back(std::move(step));
  if (steps_.size() > capacity_) steps_.pop_front();
}

InnerStepInfo inner_step(InnerState& state, std::span<const Tensor> theta, const InnerLossFn& loss,
                         const SgdHyper& hyper, UnrollWindow* window, std::size_t step_index) {
  InnerStepInfo info;
  try {
    if (!window) {
      Tape tape;
      auto omega = tape.track(state.omega);
      const auto theta_c = detach_all(theta);
      Tensor l = loss(omega, theta_c);
      info.loss = l.item();
      auto g = tape.grad(l, omega);
      info.grad_norm = l2_norm(g);
      auto r = sgd_momentum_step(state.omega, g, state.velocity, hyper, false);
      state.omega = std::move(r.params);
      state.velocity = std::move(r.buffers);
      return info;
    }
    WindowStep step;
    step.tape = std::make_unique<Tape>();
    Tape& tape = *step.tape;
    step.omega_in = tape.track(state.omega);
    step.v_in = tape.track(state.velocity);
    step.theta = tape.track(theta);
    Tensor l = loss(step.omega_in, step.theta);
    info.loss = l.item();
    auto g = tape.grad(l, step.omega_in, /*create_graph=*/true);
    info.grad_norm = l2_norm(g);
    auto r = sgd_momentum_step(step.omega_in, g, step.v_in, hyper, true);
    state.omega = detach_all(r.params);
    state.velocity = detach_all(r.buffers);
    step.omega_out = std::move(r.params);
    step.v_out = std::move(r.buffers);
    window->push(std::move(step));
  } catch (const std::domain_error& e) {
    std::ostringstream detail;
    detail << e.what() << " (loss " << info.loss << ", grad norm " << info.grad_norm << ")";
    abort_step("inner step", step_index, detail.str());
  }
  if (!std::isfinite(info.loss) || !std::isfinite(info.grad_norm)) {
    std::ostringstream detail;
    detail << "non-finite loss " << info.loss << " or grad norm " << info.grad_norm;
    abort_step("inner step", step_index, detail.str());
  }
  return info;
}

OuterResult outer_step(std::span<const Tensor> theta, UnrollWindow& window, const OuterLossFn& outer_loss,
                       const OuterConfig& config, std::size_t step_index) {
  if (window.empty()) throw std::logic_error("outer_step: empty unroll window");
  OuterResult result;
  try {
    // v = dL_outer / d omega_T
    std::vector<Tensor> adj_omega, adj_v;
    {
      Tape tape;
      auto omega_t = tape.track(detach_all(window.back().omega_out));
      Tensor l = outer_loss(omega_t);
      result.outer_loss = l.item();
      adj_omega = tape.grad(l, omega_t);
    }
    std::vector<Tensor> hyper(theta.size());
    for (std::size_t k = 0; k < theta.size(); ++k) hyper[k] = Tensor::zeros(theta[k].shape());

    for (std::size_t i = window.size(); i-- > 0;) {
      const WindowStep& step = window[i];
      // <adjoint, output> is linear in the outputs, so its gradient with
      // respect to the step's leaves is the vector-Jacobian product.
      Tensor s = dot(adj_omega[0], step.omega_out[0]);
      for (std::size_t k = 1; k < adj_omega.size(); ++k) s = add(s, dot(adj_omega[k], step.omega_out[k]));
      if (!adj_v.empty()) {
        for (std::size_t k = 0; k < adj_v.size(); ++k) s = add(s, dot(adj_v[k], step.v_out[k]));
      }
      const auto wrt = concat({step.omega_in, step.v_in, step.theta});
      auto g = step.tape->grad(s, wrt);
      const auto n = step.omega_in.size();
      adj_omega.assign(g.begin(), g.begin() + static_cast<std::ptrdiff_t>(n));
      adj_v.assign(g.begin() + static_cast<std::ptrdiff_t>(n), g.begin() + static_cast<std::ptrdiff_t>(2 * n));
      NoGradGuard no_grad;
      for (std::size_t k = 0; k < theta.size(); ++k) hyper[k] = add(hyper[k], g[2 * n + k]);
    }
    NoGradGuard no_grad;
    result.theta.reserve(theta.size());
    for (std::size_t k = 0; k < theta.size(); ++k) {
      const Tensor base = theta[k].detach();
      hyper[k] = add(hyper[k], scale(base, 2.0 * config.theta_l2));
      result.theta.push_back(sub(base, scale(hyper[k], config.outer_lr)));
    }
    result.hypergradient = std::move(hyper);
  } catch (const std::domain_error& e) {
    window.clear();
    abort_step("outer step", step_index, e.what());
  }
  window.clear();
  if (!std::isfinite(l2_norm(result.hypergradient))) {
    abort_step("outer step", step_index, "non-finite hypergradient");
  }
  return result;
}

}  // namespace gabo::train
