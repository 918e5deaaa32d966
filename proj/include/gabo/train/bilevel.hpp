#pragma once

#include <deque>
#include <functional>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "gabo/autodiff/optim.hpp"

namespace gabo::train {

using ad::Tensor;

/// Raised when training hits a non-finite quantity; the message carries the
/// step and whatever diagnostics were available.
class TrainingAborted : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Inner objective as a function of (omega, theta).
using InnerLossFn = std::function<Tensor(std::span<const Tensor> omega, std::span<const Tensor> theta)>;
/// Outer objective as a function of omega alone.
using OuterLossFn = std::function<Tensor(std::span<const Tensor> omega)>;

struct InnerState {
  std::vector<Tensor> omega;
  std::vector<Tensor> velocity;
};

InnerState make_inner_state(std::vector<Tensor> omega);

/// One recorded inner step. Leaves (omega_in, v_in, theta) and outputs live
/// on the step's own tape.
struct WindowStep {
  std::unique_ptr<ad::Tape> tape;
  std::vector<Tensor> omega_in, v_in, theta;
  std::vector<Tensor> omega_out, v_out;
};

/// The last `capacity` recorded inner steps, oldest first.
class UnrollWindow {
 public:
  explicit UnrollWindow(std::size_t capacity);

  std::size_t capacity() const { return capacity_; }
  std::size_t size() const { return steps_.size(); }
  bool empty() const { return steps_.empty(); }
  void push(WindowStep step);
  void clear() { steps_.clear(); }
  const WindowStep& operator[](std::size_t i) const { return steps_[i]; }
  const WindowStep& back() const { return steps_.back(); }

 private:
  std::size_t capacity_;
  std::deque<WindowStep> steps_;
};

struct InnerStepInfo {
  double loss = 0.0;
  double grad_norm = 0.0;
};

/// Gradient step on omega for `loss(omega, theta)`. theta is read, never
/// written. With a window the step is recorded (gradients with create_graph,
/// tracked momentum update) and appended, evicting the oldest entry when full.
InnerStepInfo inner_step(InnerState& state, std::span<const Tensor> theta, const InnerLossFn& loss,
                         const ad::SgdHyper& hyper, UnrollWindow* window, std::size_t step_index = 0);

struct OuterConfig {
  double outer_lr = 0.01;
  double theta_l2 = 0.01;  // adds 2 * theta_l2 * theta to the hypergradient
};

struct OuterResult {
  std::vector<Tensor> theta;
  std::vector<Tensor> hypergradient;
  double outer_loss = 0.0;
};

/// Truncated hypergradient of `outer_loss` at the window's last omega,
/// back-propagated through every recorded step; momentum entering the window
/// is held constant. Returns the updated theta and clears the window.
OuterResult outer_step(std::span<const Tensor> theta, UnrollWindow& window, const OuterLossFn& outer_loss,
                       const OuterConfig& config, std::size_t step_index = 0);

/// Replays `losses.size()` inner steps from (omega0, v0) at a given theta and
/// returns the outer loss at the end. Reference for the hypergradient.
double replay_outer_loss(std::span<const Tensor> omega0, std::span<const Tensor> v0, std::span<const Tensor> theta,
                         std::span<const InnerLossFn> losses, std::span<const ad::SgdHyper> hypers,
                         const OuterLossFn& outer_loss);

double l2_norm(std::span<const Tensor> tensors);

}  // namespace gabo::train
