#pragma once

#include <cstddef>
#include <deque>
#include <functional>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace gabo::ad {

using Shape = std::vector<std::size_t>;
using NodeId = std::size_t;

class Tape;

std::string shape_str(const Shape& shape);
std::size_t shape_size(const Shape& shape);

/// Raised when operand shapes do not conform to an op's contract.
class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Dense row-major array of doubles. Values are immutable and shared between
/// copies; a tracked tensor additionally carries a handle into a Tape.
class Tensor {
 public:
  Tensor() = default;
  Tensor(Shape shape, std::vector<double> values);

  static Tensor scalar(double value);
  static Tensor zeros(Shape shape);
  static Tensor full(Shape shape, double value);
  static Tensor vector(std::vector<double> values);
  static Tensor matrix(std::size_t rows, std::size_t cols, std::vector<double> values);
  static Tensor from_rows(const std::vector<std::vector<double>>& rows);

  bool defined() const noexcept { return values_ != nullptr; }
  const Shape& shape() const noexcept { return shape_; }
  std::size_t rank() const noexcept { return shape_.size(); }
  std::size_t size() const noexcept { return values_ ? values_->size() : 0; }
  std::size_t rows() const;
  std::size_t cols() const;

  std::span<const double> values() const noexcept;
  double operator[](std::size_t i) const { return (*values_)[i]; }
  double at(std::size_t row, std::size_t col) const;
  double item() const;
  std::vector<double> to_vector() const { return values_ ? *values_ : std::vector<double>{}; }

  bool tracked() const noexcept { return tape_ != nullptr; }
  Tape* tape() const noexcept { return tape_; }
  NodeId node() const noexcept { return node_; }

  /// Same values, no tape handle.
  Tensor detach() const;

 private:
  friend class Tape;

  Shape shape_;
  std::shared_ptr<const std::vector<double>> values_;
  Tape* tape_ = nullptr;
  NodeId node_ = 0;
};

/// Vector-Jacobian product of one recorded op. Receives the adjoint of the
/// op's output and the output itself; returns one adjoint per input (an
/// undefined Tensor where the input needs none). Implementations are written
/// in terms of differentiable ops so that a backward pass can itself be
/// recorded.
using BackwardFn = std::function<std::vector<Tensor>(const Tensor& grad_output, const Tensor& output)>;

/// Ordered record of differentiable ops. Records are appended in evaluation
/// order, so inputs always precede outputs. `grad` with `create_graph` records
/// the backward computation onto this same tape, which is what makes
/// gradients of gradients available.
///
/// A tape must outlive every tensor that refers to it.
class Tape {
 public:
  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  /// Registers a leaf variable on this tape.
  Tensor track(const Tensor& value);
  std::vector<Tensor> track(std::span<const Tensor> values);

  /// Gradient of a scalar `output` with respect to each of `wrt`. Inputs not
  /// reachable from `output` receive zeros.
  std::vector<Tensor> grad(const Tensor& output, std::span<const Tensor> wrt, bool create_graph = false);

  std::size_t size() const noexcept { return records_.size(); }
  std::string_view op_name(NodeId node) const { return records_.at(node).op; }
  std::span<const Tensor> inputs_of(NodeId node) const { return records_.at(node).inputs; }
  /// Number of backward passes run over this tape.
  std::size_t generation() const noexcept { return generation_; }

  Tensor record(std::string_view op, const Tensor& value, std::vector<Tensor> inputs, BackwardFn backward);

 private:
  struct Record {
    std::string_view op;
    std::vector<Tensor> inputs;
    BackwardFn backward;
    Tensor output;
  };

  std::deque<Record> records_;
  std::size_t generation_ = 0;
};

bool grad_enabled() noexcept;

/// Disables recording on the current thread for its lifetime.
class NoGradGuard {
 public:
  NoGradGuard();
  ~NoGradGuard();
  NoGradGuard(const NoGradGuard&) = delete;
  NoGradGuard& operator=(const NoGradGuard&) = delete;

 private:
  bool previous_;
};

std::vector<Tensor> detach_all(std::span<const Tensor> tensors);

}  // namespace gabo::ad
