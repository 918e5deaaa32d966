#include "gabo/autodiff/gradcheck.hpp"

#include <algorithm>
#include <cmath>

#include "gabo/autodiff/ops.hpp"

namespace gabo::ad {

namespace {

std::vector<Tensor> shifted(std::span<const Tensor> point, std::span<const Tensor> direction, double step) {
  std::vector<Tensor> out;
  out.reserve(point.size());
  for (std::size_t i = 0; i < point.size(); ++i) {
    auto values = point[i].to_vector();
    auto dir = direction[i].values();
    for (std::size_t k = 0; k < values.size(); ++k) values[k] += step * dir[k];
    out.emplace_back(point[i].shape(), std::move(values));
  }
  return out;
}

}  // namespace

double relative_error(double a, double b, double floor) {
  const double denom = std::max({std::abs(a), std::abs(b), floor});
  return std::abs(a - b) / denom;
}

double max_relative_error(std::span<const Tensor> a, std::span<const Tensor> b, double floor) {
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    auto x = a[i].values();
    auto y = b[i].values();
    if (x.size() != y.size()) throw ShapeError("max_relative_error: size mismatch");
    for (std::size_t k = 0; k < x.size(); ++k) worst = std::max(worst, relative_error(x[k], y[k], floor));
  }
  return worst;
}

std::vector<Tensor> numeric_gradient(const ScalarFn& f, std::span<const Tensor> point, double step) {
  NoGradGuard no_grad;
  std::vector<Tensor> args(point.begin(), point.end());
  args = detach_all(args);
  std::vector<Tensor> grads;
  for (std::size_t i = 0; i < args.size(); ++i) {
    const Tensor original = args[i];
    std::vector<double> g(original.size());
    for (std::size_t k = 0; k < original.size(); ++k) {
      auto plus = original.to_vector();
      auto minus = original.to_vector();
      plus[k] += step;
      minus[k] -= step;
      args[i] = Tensor(original.shape(), std::move(plus));
      const double fp = f(args).item();
      args[i] = Tensor(original.shape(), std::move(minus));
      const double fm = f(args).item();
      g[k] = (fp - fm) / (2.0 * step);
    }
    args[i] = original;
    grads.emplace_back(original.shape(), std::move(g));
  }
  return grads;
}

std::vector<Tensor> autodiff_gradient(const ScalarFn& f, std::span<const Tensor> point) {
  Tape tape;
  auto leaves = tape.track(detach_all(point));
  Tensor out = f(leaves);
  return tape.grad(out, leaves);
}

std::vector<Tensor> autodiff_hvp(const ScalarFn& f, std::span<const Tensor> point, std::span<const Tensor> direction) {
  Tape tape;
  auto leaves = tape.track(detach_all(point));
  Tensor out = f(leaves);
  auto grads = tape.grad(out, leaves, /*create_graph=*/true);
  Tensor inner = Tensor::scalar(0.0);
  for (std::size_t i = 0; i < grads.size(); ++i) inner = add(inner, dot(grads[i], direction[i].detach()));
  if (!inner.tracked()) {
    // Gradient independent of the inputs: the Hessian vanishes.
    std::vector<Tensor> zeros;
    for (const auto& p : point) zeros.push_back(Tensor::zeros(p.shape()));
    return zeros;
  }
  return tape.grad(inner, leaves);
}

std::vector<Tensor> numeric_hvp(const ScalarFn& f, std::span<const Tensor> point, std::span<const Tensor> direction,
                                double step) {
  auto plus = autodiff_gradient(f, shifted(point, direction, step));
  auto minus = autodiff_gradient(f, shifted(point, direction, -step));
  std::vector<Tensor> out;
  for (std::size_t i = 0; i < plus.size(); ++i) {
    std::vector<double> values(plus[i].size());
    for (std::size_t k = 0; k < values.size(); ++k) values[k] = (plus[i][k] - minus[i][k]) / (2.0 * step);
    out.emplace_back(plus[i].shape(), std::move(values));
  }
  return out;
}

}  // namespace gabo::ad
