#include "gabo/autodiff/tensor.hpp"

#include <algorithm>
#include <optional>
#include <sstream>

#include "gabo/autodiff/ops.hpp"

namespace gabo::ad {

namespace {
thread_local bool g_grad_enabled = true;
}

std::string shape_str(const Shape& shape) {
  std::ostringstream out;
  out << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) out << ", ";
    out << shape[i];
  }
  out << ']';
  return out.str();
}

std::size_t shape_size(const Shape& shape) {
  std::size_t n = 1;
  for (auto extent : shape) n *= extent;
  return n;
}

Tensor::Tensor(Shape shape, std::vector<double> values) : shape_(std::move(shape)) {
  if (shape_size(shape_) != values.size()) {
    throw ShapeError("Tensor: shape " + shape_str(shape_) + " does not hold " + std::to_string(values.size()) +
                     " values");
  }
  values_ = std::make_shared<const std::vector<double>>(std::move(values));
}

Tensor Tensor::scalar(double value) { return Tensor({}, {value}); }

Tensor Tensor::zeros(Shape shape) { return full(std::move(shape), 0.0); }

Tensor Tensor::full(Shape shape, double value) {
  const auto n = shape_size(shape);
  return Tensor(std::move(shape), std::vector<double>(n, value));
}

Tensor Tensor::vector(std::vector<double> values) {
  const auto n = values.size();
  return Tensor({n}, std::move(values));
}

Tensor Tensor::matrix(std::size_t rows, std::size_t cols, std::vector<double> values) {
  return Tensor({rows, cols}, std::move(values));
}

Tensor Tensor::from_rows(const std::vector<std::vector<double>>& rows) {
  const std::size_t cols = rows.empty() ? 0 : rows.front().size();
  std::vector<double> values;
  values.reserve(rows.size() * cols);
  for (const auto& row : rows) {
    if (row.size() != cols) throw ShapeError("Tensor::from_rows: ragged rows");
    values.insert(values.end(), row.begin(), row.end());
  }
  return Tensor({rows.size(), cols}, std::move(values));
}

std::size_t Tensor::rows() const {
  if (rank() == 0) return 1;
  return shape_[0];
}

std::size_t Tensor::cols() const {
  if (rank() == 2) return shape_[1];
  if (rank() <= 1) return 1;
  throw ShapeError("Tensor::cols: rank " + std::to_string(rank()) + " tensor");
}

std::span<const double> Tensor::values() const noexcept {
  if (!values_) return {};
  return {values_->data(), values_->size()};
}

double Tensor::at(std::size_t row, std::size_t col) const { return (*values_)[row * cols() + col]; }

double Tensor::item() const {
  if (size() != 1) throw ShapeError("Tensor::item: tensor of shape " + shape_str(shape_) + " is not a scalar");
  return (*values_)[0];
}

Tensor Tensor::detach() const {
  Tensor out;
  out.shape_ = shape_;
  out.values_ = values_;
  return out;
}

std::vector<Tensor> detach_all(std::span<const Tensor> tensors) {
  std::vector<Tensor> out;
  out.reserve(tensors.size());
  for (const auto& t : tensors) out.push_back(t.detach());
  return out;
}

bool grad_enabled() noexcept { return g_grad_enabled; }

NoGradGuard::NoGradGuard() : previous_(g_grad_enabled) { g_grad_enabled = false; }
NoGradGuard::~NoGradGuard() { g_grad_enabled = previous_; }

Tensor Tape::track(const Tensor& value) {
  if (!value.defined()) throw std::invalid_argument("Tape::track: undefined tensor");
  return record("leaf", value, {}, nullptr);
}

std::vector<Tensor> Tape::track(std::span<const Tensor> values) {
  std::vector<Tensor> out;
  out.reserve(values.size());
  for (const auto& v : values) out.push_back(track(v));
  return out;
}

Tensor Tape::record(std::string_view op, const Tensor& value, std::vector<Tensor> inputs, BackwardFn backward) {
  Tensor out = value.detach();
  out.tape_ = this;
  out.node_ = records_.size();
  records_.push_back(Record{op, std::move(inputs), std::move(backward), out});
  return out;
}

std::vector<Tensor> Tape::grad(const Tensor& output, std::span<const Tensor> wrt, bool create_graph) {
  if (output.size() != 1) {
    throw ShapeError("grad: output must be a scalar, got shape " + shape_str(output.shape()));
  }
  if (output.tape() != this) throw std::invalid_argument("grad: output is not recorded on this tape");
  NodeId lowest = output.node();
  for (std::size_t i = 0; i < wrt.size(); ++i) {
    if (wrt[i].tape() != this) {
      throw std::invalid_argument("grad: wrt[" + std::to_string(i) + "] is not recorded on this tape");
    }
    lowest = std::min(lowest, wrt[i].node());
  }
  ++generation_;

  std::optional<NoGradGuard> no_grad;
  if (!create_graph) no_grad.emplace();

  const NodeId top = output.node();
  std::vector<Tensor> adjoint(top + 1);
  std::vector<bool> keep(top + 1, false);
  keep[top] = true;
  for (const auto& w : wrt) {
    if (w.node() <= top) keep[w.node()] = true;
  }
  adjoint[top] = Tensor::full(output.shape(), 1.0);

  for (NodeId id = top + 1; id-- > lowest;) {
    if (!adjoint[id].defined()) continue;
    // deque references stay valid while the backward pass appends records.
    const Record& rec = records_[id];
    if (rec.inputs.empty()) continue;
    auto input_grads = rec.backward(adjoint[id], rec.output);
    for (std::size_t k = 0; k < rec.inputs.size(); ++k) {
      const Tensor& in = rec.inputs[k];
      if (!in.tracked() || k >= input_grads.size() || !input_grads[k].defined()) continue;
      Tensor& slot = adjoint[in.node()];
      slot = slot.defined() ? add(slot, input_grads[k]) : input_grads[k];
    }
    if (!keep[id]) adjoint[id] = Tensor();
  }

  std::vector<Tensor> result;
  result.reserve(wrt.size());
  for (const auto& w : wrt) {
    const Tensor g = w.node() <= top ? adjoint[w.node()] : Tensor();
    if (!g.defined()) {
      result.push_back(Tensor::zeros(w.shape()));
    } else if (!create_graph) {
      result.push_back(g.detach());
    } else {
      result.push_back(g);
    }
  }
  return result;
}

}  // namespace gabo::ad
