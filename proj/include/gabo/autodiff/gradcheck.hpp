#pragma once

#include <functional>
#include <span>
#include <vector>

#include "gabo/autodiff/tensor.hpp"

// Central-difference oracles for the reverse-mode engine. They only ever
// evaluate forward values, so they are independent of every backward rule.
namespace gabo::ad {

/// Scalar-valued function of a list of tensors. Must work on both tracked and
/// untracked inputs.
using ScalarFn = std::function<Tensor(std::span<const Tensor>)>;

/// |a - b| / max(|a|, |b|, floor)
double relative_error(double a, double b, double floor = 1e-8);
double max_relative_error(std::span<const Tensor> a, std::span<const Tensor> b, double floor = 1e-8);

/// Central differences of `f` at `point`, one entry at a time.
std::vector<Tensor> numeric_gradient(const ScalarFn& f, std::span<const Tensor> point, double step = 1e-5);

/// Reverse-mode gradient of `f` at `point` on a fresh tape.
std::vector<Tensor> autodiff_gradient(const ScalarFn& f, std::span<const Tensor> point);

/// Hessian-vector product by reverse-over-reverse: grad(<grad f, v>).
std::vector<Tensor> autodiff_hvp(const ScalarFn& f, std::span<const Tensor> point, std::span<const Tensor> direction);

/// Hessian-vector product by central differences of first gradients along
/// `direction`.
std::vector<Tensor> numeric_hvp(const ScalarFn& f, std::span<const Tensor> point, std::span<const Tensor> direction,
                                double step = 1e-5);

}  // namespace gabo::ad
