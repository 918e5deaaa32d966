#include "gabo/autodiff/ops.hpp"

#include <Eigen/Core>
#include <cmath>
#include <initializer_list>
#include <stdexcept>
#include <string>

namespace gabo::ad {

namespace {

using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

[[noreturn]] void shape_error(std::string_view op, const Tensor& a, const Tensor& b) {
  throw ShapeError(std::string(op) + ": incompatible shapes " + shape_str(a.shape()) + " and " +
                   shape_str(b.shape()));
}

[[noreturn]] void shape_error(std::string_view op, const Tensor& a, const std::string& expected) {
  throw ShapeError(std::string(op) + ": got shape " + shape_str(a.shape()) + ", expected " + expected);
}

void require_rank2(std::string_view op, const Tensor& a) {
  if (a.rank() != 2) shape_error(op, a, "a rank-2 tensor");
}

void check_finite(std::string_view op, const std::vector<double>& values) {
  for (double v : values) {
    if (!std::isfinite(v)) throw std::domain_error(std::string(op) + ": produced a non-finite value");
  }
}

Tape* common_tape(std::string_view op, std::initializer_list<const Tensor*> inputs) {
  Tape* tape = nullptr;
  for (const Tensor* t : inputs) {
    if (!t->tracked()) continue;
    if (tape && tape != t->tape()) throw std::invalid_argument(std::string(op) + ": inputs live on different tapes");
    tape = t->tape();
  }
  return tape;
}

// Builds the result and records it when any input is tracked and recording is
// enabled. `make_backward` is only invoked when a record is created.
template <typename MakeBackward>
Tensor finish(std::string_view op, Shape shape, std::vector<double> values, std::initializer_list<const Tensor*> inputs,
              MakeBackward&& make_backward) {
  check_finite(op, values);
  Tensor out(std::move(shape), std::move(values));
  if (!grad_enabled()) return out;
  Tape* tape = common_tape(op, inputs);
  if (!tape) return out;
  std::vector<Tensor> recorded;
  recorded.reserve(inputs.size());
  for (const Tensor* t : inputs) recorded.push_back(*t);
  return tape->record(op, out, std::move(recorded), make_backward());
}

template <typename F>
std::vector<double> map_values(const Tensor& a, F f) {
  std::vector<double> out(a.size());
  auto in = a.values();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = f(in[i]);
  return out;
}

template <typename F>
std::vector<double> zip_values(const Tensor& a, const Tensor& b, F f) {
  std::vector<double> out(a.size());
  auto x = a.values();
  auto y = b.values();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = f(x[i], y[i]);
  return out;
}

}  // namespace

Tensor add(const Tensor& a, const Tensor& b) {
  if (a.shape() != b.shape()) shape_error("add", a, b);
  return finish("add", a.shape(), zip_values(a, b, [](double x, double y) { return x + y; }), {&a, &b}, [] {
    return [](const Tensor& g, const Tensor&) { return std::vector<Tensor>{g, g}; };
  });
}

Tensor sub(const Tensor& a, const Tensor& b) {
  if (a.shape() != b.shape()) shape_error("sub", a, b);
  return finish("sub", a.shape(), zip_values(a, b, [](double x, double y) { return x - y; }), {&a, &b}, [] {
    return [](const Tensor& g, const Tensor&) { return std::vector<Tensor>{g, neg(g)}; };
  });
}

Tensor mul(const Tensor& a, const Tensor& b) {
  if (a.shape() != b.shape()) shape_error("mul", a, b);
  return finish("mul", a.shape(), zip_values(a, b, [](double x, double y) { return x * y; }), {&a, &b}, [&] {
    return [a, b](const Tensor& g, const Tensor&) { return std::vector<Tensor>{mul(g, b), mul(g, a)}; };
  });
}

Tensor neg(const Tensor& a) {
  return finish("neg", a.shape(), map_values(a, [](double x) { return -x; }), {&a}, [] {
    return [](const Tensor& g, const Tensor&) { return std::vector<Tensor>{neg(g)}; };
  });
}

Tensor scale(const Tensor& a, double factor) {
  return finish("scale", a.shape(), map_values(a, [factor](double x) { return factor * x; }), {&a}, [factor] {
    return [factor](const Tensor& g, const Tensor&) { return std::vector<Tensor>{scale(g, factor)}; };
  });
}

Tensor matmul(const Tensor& a, const Tensor& b) {
  require_rank2("matmul", a);
  require_rank2("matmul", b);
  if (a.cols() != b.rows()) shape_error("matmul", a, b);
  const auto m = a.rows(), k = a.cols(), n = b.cols();
  std::vector<double> values(m * n, 0.0);
  if (m && n && k) {
    Eigen::Map<const RowMajor> lhs(a.values().data(), m, k);
    Eigen::Map<const RowMajor> rhs(b.values().data(), k, n);
    Eigen::Map<RowMajor> res(values.data(), m, n);
    res.noalias() = lhs * rhs;
  }
  return finish("matmul", {m, n}, std::move(values), {&a, &b}, [&] {
    return [a, b](const Tensor& g, const Tensor&) {
      std::vector<Tensor> grads(2);
      if (a.tracked()) grads[0] = matmul(g, transpose(b));
      if (b.tracked()) grads[1] = matmul(transpose(a), g);
      return grads;
    };
  });
}

Tensor transpose(const Tensor& a) {
  require_rank2("transpose", a);
  const auto r = a.rows(), c = a.cols();
  std::vector<double> values(r * c);
  auto in = a.values();
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t j = 0; j < c; ++j) values[j * r + i] = in[i * c + j];
  return finish("transpose", {c, r}, std::move(values), {&a}, [] {
    return [](const Tensor& g, const Tensor&) { return std::vector<Tensor>{transpose(g)}; };
  });
}

Tensor relu(const Tensor& a) {
  return finish("relu", a.shape(), map_values(a, [](double x) { return x > 0.0 ? x : 0.0; }), {&a}, [&] {
    // The mask is piecewise constant, so it enters the backward graph as a constant.
    Tensor mask(a.shape(), map_values(a, [](double x) { return x > 0.0 ? 1.0 : 0.0; }));
    return [mask](const Tensor& g, const Tensor&) { return std::vector<Tensor>{mul(g, mask)}; };
  });
}

Tensor sigmoid(const Tensor& a) {
  auto values = map_values(a, [](double x) {
    if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
  });
  return finish("sigmoid", a.shape(), std::move(values), {&a}, [] {
    return [](const Tensor& g, const Tensor& s) {
      const Tensor one_minus = sub(Tensor::full(s.shape(), 1.0), s);
      return std::vector<Tensor>{mul(g, mul(s, one_minus))};
    };
  });
}

Tensor softplus(const Tensor& a) {
  auto values = map_values(a, [](double x) { return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x))); });
  return finish("softplus", a.shape(), std::move(values), {&a}, [&] {
    return [a](const Tensor& g, const Tensor&) { return std::vector<Tensor>{mul(g, sigmoid(a))}; };
  });
}

Tensor sum(const Tensor& a) {
  double total = 0.0;
  for (double v : a.values()) total += v;
  return finish("sum", {}, {total}, {&a}, [&] {
    Shape shape = a.shape();
    return [shape](const Tensor& g, const Tensor&) { return std::vector<Tensor>{broadcast_scalar(g, shape)}; };
  });
}

Tensor mean(const Tensor& a) {
  if (a.size() == 0) throw ShapeError("mean: empty tensor");
  return scale(sum(a), 1.0 / static_cast<double>(a.size()));
}

Tensor broadcast_scalar(const Tensor& s, const Shape& shape) {
  if (s.size() != 1) shape_error("broadcast_scalar", s, "a single value");
  return finish("broadcast_scalar", shape, std::vector<double>(shape_size(shape), s[0]), {&s}, [&] {
    Shape in_shape = s.shape();
    return [in_shape](const Tensor& g, const Tensor&) { return std::vector<Tensor>{reshape(sum(g), in_shape)}; };
  });
}

Tensor broadcast_rows(const Tensor& v, std::size_t rows) {
  if (v.rank() != 1) shape_error("broadcast_rows", v, "a rank-1 tensor");
  const auto d = v.size();
  std::vector<double> values(rows * d);
  auto in = v.values();
  for (std::size_t i = 0; i < rows; ++i) std::copy(in.begin(), in.end(), values.begin() + i * d);
  return finish("broadcast_rows", {rows, d}, std::move(values), {&v}, [] {
    return [](const Tensor& g, const Tensor&) { return std::vector<Tensor>{sum_rows(g)}; };
  });
}

Tensor sum_rows(const Tensor& a) {
  require_rank2("sum_rows", a);
  const auto r = a.rows(), c = a.cols();
  std::vector<double> values(c, 0.0);
  auto in = a.values();
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t j = 0; j < c; ++j) values[j] += in[i * c + j];
  return finish("sum_rows", {c}, std::move(values), {&a}, [r] {
    return [r](const Tensor& g, const Tensor&) { return std::vector<Tensor>{broadcast_rows(g, r)}; };
  });
}

Tensor reshape(const Tensor& a, Shape shape) {
  if (shape_size(shape) != a.size()) shape_error("reshape", a, shape_str(shape) + "-compatible size");
  if (shape == a.shape()) return a;
  return finish("reshape", shape, a.to_vector(), {&a}, [&] {
    Shape in_shape = a.shape();
    return [in_shape](const Tensor& g, const Tensor&) { return std::vector<Tensor>{reshape(g, in_shape)}; };
  });
}

Tensor concat_cols(std::span<const Tensor> parts) {
  if (parts.empty()) throw ShapeError("concat_cols: no inputs");
  const auto rows = parts[0].rows();
  std::size_t total = 0;
  for (const auto& p : parts) {
    require_rank2("concat_cols", p);
    if (p.rows() != rows) shape_error("concat_cols", parts[0], p);
    total += p.cols();
  }
  std::vector<double> values(rows * total);
  std::size_t offset = 0;
  for (const auto& p : parts) {
    const auto c = p.cols();
    auto in = p.values();
    for (std::size_t i = 0; i < rows; ++i)
      std::copy(in.begin() + i * c, in.begin() + (i + 1) * c, values.begin() + i * total + offset);
    offset += c;
  }
  Tensor out({rows, total}, values);
  check_finite("concat_cols", values);
  if (!grad_enabled()) return out;
  Tape* tape = nullptr;
  for (const auto& p : parts) {
    if (!p.tracked()) continue;
    if (tape && tape != p.tape()) throw std::invalid_argument("concat_cols: inputs live on different tapes");
    tape = p.tape();
  }
  if (!tape) return out;
  std::vector<std::size_t> offsets, widths;
  offset = 0;
  for (const auto& p : parts) {
    offsets.push_back(offset);
    widths.push_back(p.cols());
    offset += p.cols();
  }
  std::vector<Tensor> inputs(parts.begin(), parts.end());
  return tape->record("concat_cols", out, inputs, [offsets, widths](const Tensor& g, const Tensor&) {
    std::vector<Tensor> grads;
    for (std::size_t k = 0; k < offsets.size(); ++k) grads.push_back(slice_cols(g, offsets[k], widths[k]));
    return grads;
  });
}

Tensor slice_cols(const Tensor& a, std::size_t offset, std::size_t width) {
  require_rank2("slice_cols", a);
  const auto rows = a.rows(), c = a.cols();
  if (offset + width > c) shape_error("slice_cols", a, "at least " + std::to_string(offset + width) + " columns");
  std::vector<double> values(rows * width);
  auto in = a.values();
  for (std::size_t i = 0; i < rows; ++i)
    std::copy(in.begin() + i * c + offset, in.begin() + i * c + offset + width, values.begin() + i * width);
  return finish("slice_cols", {rows, width}, std::move(values), {&a}, [offset, c] {
    return [offset, c](const Tensor& g, const Tensor&) { return std::vector<Tensor>{embed_cols(g, offset, c)}; };
  });
}

Tensor embed_cols(const Tensor& a, std::size_t offset, std::size_t total_cols) {
  require_rank2("embed_cols", a);
  const auto rows = a.rows(), c = a.cols();
  if (offset + c > total_cols) shape_error("embed_cols", a, "at most " + std::to_string(total_cols - offset) + " columns");
  std::vector<double> values(rows * total_cols, 0.0);
  auto in = a.values();
  for (std::size_t i = 0; i < rows; ++i)
    std::copy(in.begin() + i * c, in.begin() + (i + 1) * c, values.begin() + i * total_cols + offset);
  return finish("embed_cols", {rows, total_cols}, std::move(values), {&a}, [offset, c] {
    return [offset, c](const Tensor& g, const Tensor&) { return std::vector<Tensor>{slice_cols(g, offset, c)}; };
  });
}

Tensor index_select_rows(const Tensor& a, const Index& index) {
  require_rank2("index_select_rows", a);
  const auto rows = a.rows(), c = a.cols();
  std::vector<double> values(index.size() * c);
  auto in = a.values();
  for (std::size_t i = 0; i < index.size(); ++i) {
    if (index[i] >= rows) {
      throw ShapeError("index_select_rows: index " + std::to_string(index[i]) + " out of range for shape " +
                       shape_str(a.shape()));
    }
    std::copy(in.begin() + index[i] * c, in.begin() + (index[i] + 1) * c, values.begin() + i * c);
  }
  return finish("index_select_rows", {index.size(), c}, std::move(values), {&a}, [&] {
    return [index, rows](const Tensor& g, const Tensor&) {
      return std::vector<Tensor>{scatter_sum_rows(g, index, rows)};
    };
  });
}

Tensor scatter_sum_rows(const Tensor& a, const Index& index, std::size_t out_rows) {
  require_rank2("scatter_sum_rows", a);
  if (index.size() != a.rows()) shape_error("scatter_sum_rows", a, std::to_string(index.size()) + " rows");
  const auto c = a.cols();
  std::vector<double> values(out_rows * c, 0.0);
  auto in = a.values();
  for (std::size_t i = 0; i < index.size(); ++i) {
    if (index[i] >= out_rows) {
      throw ShapeError("scatter_sum_rows: target row " + std::to_string(index[i]) + " out of range for " +
                       std::to_string(out_rows) + " rows");
    }
    double* dst = values.data() + index[i] * c;
    const double* src = in.data() + i * c;
    for (std::size_t j = 0; j < c; ++j) dst[j] += src[j];
  }
  return finish("scatter_sum_rows", {out_rows, c}, std::move(values), {&a}, [&] {
    return [index](const Tensor& g, const Tensor&) { return std::vector<Tensor>{index_select_rows(g, index)}; };
  });
}

Tensor dot(const Tensor& a, const Tensor& b) { return sum(mul(a, b)); }

Tensor squared_norm(std::span<const Tensor> tensors) {
  Tensor total = Tensor::scalar(0.0);
  for (const auto& t : tensors) total = add(total, sum(mul(t, t)));
  return total;
}

}  // namespace gabo::ad
