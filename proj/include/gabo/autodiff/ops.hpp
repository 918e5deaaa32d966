#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "gabo/autodiff/tensor.hpp"

// Differentiable ops. A result is recorded on the tape of its tracked inputs
// while recording is enabled; mixing tensors from two tapes is an error.
// Elementwise ops require identical shapes; the explicit broadcast ops cover
// the rank-2 cases the models need.
namespace gabo::ad {

using Index = std::vector<std::uint32_t>;

Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor neg(const Tensor& a);
Tensor scale(const Tensor& a, double factor);

/// [m,k] x [k,n] -> [m,n]
Tensor matmul(const Tensor& a, const Tensor& b);
Tensor transpose(const Tensor& a);

Tensor relu(const Tensor& a);
Tensor sigmoid(const Tensor& a);
/// log(1 + exp(a)), evaluated without overflow.
Tensor softplus(const Tensor& a);

/// Sum of all entries -> scalar.
Tensor sum(const Tensor& a);
Tensor mean(const Tensor& a);
/// Scalar -> tensor of `shape` filled with its value.
Tensor broadcast_scalar(const Tensor& s, const Shape& shape);
/// Row vector [d] -> [rows, d].
Tensor broadcast_rows(const Tensor& v, std::size_t rows);
/// [n, d] -> [d], the column sums.
Tensor sum_rows(const Tensor& a);
Tensor reshape(const Tensor& a, Shape shape);

/// Column-wise concatenation of rank-2 tensors with equal row counts.
Tensor concat_cols(std::span<const Tensor> parts);
Tensor slice_cols(const Tensor& a, std::size_t offset, std::size_t width);
/// Places `a` at column `offset` of a zero [rows, total_cols] matrix.
Tensor embed_cols(const Tensor& a, std::size_t offset, std::size_t total_cols);

/// out[i] = a[index[i]] (row gather, e.g. embedding lookup).
Tensor index_select_rows(const Tensor& a, const Index& index);
/// out[index[i]] += a[i] for an output with `out_rows` rows (neighbourhood or
/// per-graph aggregation).
Tensor scatter_sum_rows(const Tensor& a, const Index& index, std::size_t out_rows);

Tensor dot(const Tensor& a, const Tensor& b);
/// Sum of squares of every tensor in `tensors`.
Tensor squared_norm(std::span<const Tensor> tensors);

inline Tensor operator+(const Tensor& a, const Tensor& b) { return add(a, b); }
inline Tensor operator-(const Tensor& a, const Tensor& b) { return sub(a, b); }
inline Tensor operator*(const Tensor& a, const Tensor& b) { return mul(a, b); }
inline Tensor operator-(const Tensor& a) { return neg(a); }
inline Tensor operator*(double s, const Tensor& a) { return scale(a, s); }

}  // namespace gabo::ad
