#include "gabo/autodiff/op_checks.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include "gabo/autodiff/gradcheck.hpp"
#include "gabo/autodiff/ops.hpp"
#include "gabo/common/random.hpp"

namespace gabo::ad {

namespace {

Tensor random_tensor(Rng& rng, Shape shape, double away_from_zero = 0.0) {
  std::vector<double> values(shape_size(shape));
  for (auto& v : values) {
    v = rng.uniform(-1.0, 1.0);
    if (away_from_zero > 0.0) v = (v < 0 ? -1.0 : 1.0) * (away_from_zero + std::abs(v));
  }
  return Tensor(std::move(shape), std::move(values));
}

using UnaryOp = std::function<Tensor(std::span<const Tensor>)>;

struct Instance {
  std::vector<Tensor> inputs;
  UnaryOp op;
};

using Generator = std::function<Instance(Rng&)>;

struct Entry {
  std::string name;
  Generator make;
};

std::size_t dim(Rng& rng) { return static_cast<std::size_t>(rng.range(1, 4)); }

std::vector<Entry> catalog() {
  std::vector<Entry> ops;
  auto binary = [](std::string name, Tensor (*fn)(const Tensor&, const Tensor&)) {
    return Entry{name, [fn](Rng& rng) {
                   Shape s{dim(rng), dim(rng)};
                   return Instance{{random_tensor(rng, s), random_tensor(rng, s)},
                                   [fn](std::span<const Tensor> x) { return fn(x[0], x[1]); }};
                 }};
  };
  ops.push_back(binary("add", &add));
  ops.push_back(binary("sub", &sub));
  ops.push_back(binary("mul", &mul));
  ops.push_back({"neg", [](Rng& rng) {
                   return Instance{{random_tensor(rng, {dim(rng), dim(rng)})},
                                   [](std::span<const Tensor> x) { return neg(x[0]); }};
                 }});
  ops.push_back({"scale", [](Rng& rng) {
                   const double c = rng.uniform(-2.0, 2.0);
                   return Instance{{random_tensor(rng, {dim(rng), dim(rng)})},
                                   [c](std::span<const Tensor> x) { return scale(x[0], c); }};
                 }});
  ops.push_back({"matmul", [](Rng& rng) {
                   const auto m = dim(rng), k = dim(rng), n = dim(rng);
                   return Instance{{random_tensor(rng, {m, k}), random_tensor(rng, {k, n})},
                                   [](std::span<const Tensor> x) { return matmul(x[0], x[1]); }};
                 }});
  ops.push_back({"transpose", [](Rng& rng) {
                   return Instance{{random_tensor(rng, {dim(rng), dim(rng)})},
                                   [](std::span<const Tensor> x) { return transpose(x[0]); }};
                 }});
  ops.push_back({"relu", [](Rng& rng) {
                   // Keep inputs away from the kink so central differences stay on one side.
                   return Instance{{random_tensor(rng, {dim(rng), dim(rng)}, 0.05)},
                                   [](std::span<const Tensor> x) { return relu(x[0]); }};
                 }});
  ops.push_back({"sigmoid", [](Rng& rng) {
                   return Instance{{scale(random_tensor(rng, {dim(rng), dim(rng)}), 3.0)},
                                   [](std::span<const Tensor> x) { return sigmoid(x[0]); }};
                 }});
  ops.push_back({"softplus", [](Rng& rng) {
                   return Instance{{scale(random_tensor(rng, {dim(rng), dim(rng)}), 3.0)},
                                   [](std::span<const Tensor> x) { return softplus(x[0]); }};
                 }});
  ops.push_back({"sum", [](Rng& rng) {
                   return Instance{{random_tensor(rng, {dim(rng), dim(rng)})},
                                   [](std::span<const Tensor> x) { return reshape(sum(x[0]), {1, 1}); }};
                 }});
  ops.push_back({"mean", [](Rng& rng) {
                   return Instance{{random_tensor(rng, {dim(rng), dim(rng)})},
                                   [](std::span<const Tensor> x) { return reshape(mean(x[0]), {1, 1}); }};
                 }});
  ops.push_back({"broadcast_scalar", [](Rng& rng) {
                   Shape target{dim(rng), dim(rng)};
                   return Instance{{random_tensor(rng, {})},
                                   [target](std::span<const Tensor> x) { return broadcast_scalar(x[0], target); }};
                 }});
  ops.push_back({"broadcast_rows", [](Rng& rng) {
                   const auto rows = dim(rng);
                   return Instance{{random_tensor(rng, {dim(rng)})},
                                   [rows](std::span<const Tensor> x) { return broadcast_rows(x[0], rows); }};
                 }});
  ops.push_back({"sum_rows", [](Rng& rng) {
                   return Instance{{random_tensor(rng, {dim(rng), dim(rng)})},
                                   [](std::span<const Tensor> x) { return reshape(sum_rows(x[0]), {1, x[0].cols()}); }};
                 }});
  ops.push_back({"reshape", [](Rng& rng) {
                   const auto a = dim(rng), b = dim(rng);
                   return Instance{{random_tensor(rng, {a, b})},
                                   [a, b](std::span<const Tensor> x) { return reshape(x[0], {b, a}); }};
                 }});
  ops.push_back({"concat_cols", [](Rng& rng) {
                   const auto rows = dim(rng);
                   return Instance{{random_tensor(rng, {rows, dim(rng)}), random_tensor(rng, {rows, dim(rng)})},
                                   [](std::span<const Tensor> x) { return concat_cols(x); }};
                 }});
  ops.push_back({"slice_cols", [](Rng& rng) {
                   const auto cols = static_cast<std::size_t>(rng.range(2, 5));
                   const auto offset = static_cast<std::size_t>(rng.index(cols - 1));
                   const auto width = 1 + static_cast<std::size_t>(rng.index(cols - offset));
                   return Instance{{random_tensor(rng, {dim(rng), cols})}, [offset, width](std::span<const Tensor> x) {
                                     return slice_cols(x[0], offset, width);
                                   }};
                 }});
  ops.push_back({"embed_cols", [](Rng& rng) {
                   const auto cols = dim(rng);
                   const auto extra = dim(rng);
                   const auto offset = static_cast<std::size_t>(rng.index(extra + 1));
                   return Instance{{random_tensor(rng, {dim(rng), cols})}, [offset, cols, extra](std::span<const Tensor> x) {
                                     return embed_cols(x[0], offset, cols + extra);
                                   }};
                 }});
  ops.push_back({"index_select_rows", [](Rng& rng) {
                   const auto rows = dim(rng);
                   Index index(static_cast<std::size_t>(rng.range(1, 6)));
                   for (auto& i : index) i = static_cast<std::uint32_t>(rng.index(rows));
                   return Instance{{random_tensor(rng, {rows, dim(rng)})},
                                   [index](std::span<const Tensor> x) { return index_select_rows(x[0], index); }};
                 }});
  ops.push_back({"scatter_sum_rows", [](Rng& rng) {
                   const auto out_rows = dim(rng);
                   Index index(static_cast<std::size_t>(rng.range(1, 6)));
                   for (auto& i : index) i = static_cast<std::uint32_t>(rng.index(out_rows));
                   return Instance{{random_tensor(rng, {index.size(), dim(rng)})}, [index, out_rows](std::span<const Tensor> x) {
                                     return scatter_sum_rows(x[0], index, out_rows);
                                   }};
                 }});
  return ops;
}

}  // namespace

std::vector<OpCheckResult> check_all_ops(std::size_t instances, std::uint64_t seed, double step) {
  std::vector<OpCheckResult> results;
  std::uint64_t op_index = 0;
  for (const auto& entry : catalog()) {
    Rng rng(derive_seed(seed, ++op_index));
    OpCheckResult result{entry.name, instances, 0.0, 0.0};
    for (std::size_t n = 0; n < instances; ++n) {
      Instance inst = entry.make(rng);
      // Probe the op output once to size the random weights.
      Tensor probe;
      {
        NoGradGuard no_grad;
        probe = inst.op(inst.inputs);
      }
      const Tensor w1 = random_tensor(rng, probe.shape());
      const Tensor w2 = random_tensor(rng, probe.shape());
      auto op = inst.op;
      // Linear readout checks the op's own backward rule; the quadratic term
      // makes the Hessian non-trivial so the recorded backward is exercised.
      ScalarFn f = [op, w1, w2](std::span<const Tensor> x) {
        Tensor y = op(x);
        return add(sum(mul(w1, y)), sum(mul(w2, mul(y, y))));
      };
      auto analytic = autodiff_gradient(f, inst.inputs);
      auto numeric = numeric_gradient(f, inst.inputs, step);
      result.max_first_order_error = std::max(result.max_first_order_error, max_relative_error(analytic, numeric));

      std::vector<Tensor> direction;
      for (const auto& x : inst.inputs) direction.push_back(random_tensor(rng, x.shape()));
      auto hvp = autodiff_hvp(f, inst.inputs, direction);
      auto numeric_h = numeric_hvp(f, inst.inputs, direction, step);
      result.max_second_order_error = std::max(result.max_second_order_error, max_relative_error(hvp, numeric_h));
    }
    results.push_back(result);
  }
  return results;
}

}  // namespace gabo::ad
