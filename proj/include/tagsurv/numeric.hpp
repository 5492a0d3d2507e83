// Copyright 2026 The tagsurv Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

// Dense kernels for the convolutional tweet encoder. Every forward op has
// an analytic backward companion; grad_check compares the two against
// central differences.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <initializer_list>
#include <iosfwd>
#include <map>
#include <span>
#include <vector>

namespace tagsurv::numeric {

using Real = double;
using Vector = std::vector<Real>;

// Reserved id for right-padding. It never addresses a table row and its
// embedding is the zero vector.
inline constexpr std::int32_t kPadId = -1;

class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, Real fill = 0.0);
  Matrix(std::size_t rows, std::size_t cols, std::vector<Real> data);
  Matrix(std::initializer_list<std::initializer_list<Real>> rows);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }

  Real& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  Real operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<Real> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const Real> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

  std::span<Real> values() { return data_; }
  std::span<const Real> values() const { return data_; }

  void fill(Real v);
  bool all_finite() const;

  bool operator==(const Matrix&) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<Real> data_;
};

// Text format: "rows cols" header, then one line of space-separated values
// per row. Values are written with round-trip precision.
void write_matrix(std::ostream& out, const Matrix& m);
Matrix read_matrix(std::istream& in);

Real dot(std::span<const Real> a, std::span<const Real> b);
Real norm(std::span<const Real> a);
bool all_finite(std::span<const Real> v);

// Sparse gradient over table rows. Rows are kept ordered so that merging
// and applying are deterministic.
class RowGrads {
 public:
  explicit RowGrads(std::size_t cols = 0) : cols_(cols) {}

  std::size_t cols() const { return cols_; }
  bool empty() const { return rows_.empty(); }
  void clear() { rows_.clear(); }

  void add(std::size_t row, std::span<const Real> grad);
  std::span<Real> row(std::size_t r);
  const std::map<std::size_t, Vector>& rows() const { return rows_; }

  void merge(const RowGrads& other);

 private:
  std::size_t cols_;
  std::map<std::size_t, Vector> rows_;
};

// Deterministic sharded reduction: shards are folded left to right.
RowGrads reduce_shards(std::span<const RowGrads> shards);

// Gathers table rows; kPadId yields a zero row. Throws ValidationError on
// ids outside [0, table.rows()).
Matrix embed_lookup(std::span<const std::int32_t> ids, const Matrix& table);
void embed_lookup_backward(std::span<const std::int32_t> ids, const Matrix& grad_out,
                           RowGrads& grad_table);
// Exclusive-access variant: accumulates straight into a dense table
// gradient owned by the caller.
void embed_lookup_backward(std::span<const std::int32_t> ids, const Matrix& grad_out,
                           Matrix& grad_table);

// Stride-1 convolution over time with "same" zero padding. weights is
// (K*d) x H where d = input.cols(); output row t sees input rows
// t - K/2 ... t + ceil(K/2) - 1.
Matrix conv1d(const Matrix& input, const Matrix& weights, std::span<const Real> bias);

struct ConvGrads {
  Matrix input;
  Matrix weights;
  Vector bias;
};
ConvGrads conv1d_backward(const Matrix& input, const Matrix& weights, const Matrix& grad_out);

Matrix tanh_map(const Matrix& x);
Vector tanh_map(std::span<const Real> x);
// Backward in terms of the forward output y: grad * (1 - y^2).
Matrix tanh_backward(const Matrix& y, const Matrix& grad_out);
Vector tanh_backward(std::span<const Real> y, std::span<const Real> grad_out);

struct PoolResult {
  Vector values;
  std::vector<std::size_t> argmax;  // first maximising row per column
};

// Column-wise max over rows whose mask entry is true. An empty mask means
// every row is valid.
PoolResult maxpool_time(const Matrix& x, const std::vector<bool>& mask = {});
Matrix maxpool_backward(const PoolResult& pool, std::size_t rows, std::span<const Real> grad_out);

// y = W^T x + b with W of shape n x m.
Vector affine(std::span<const Real> x, const Matrix& weights, std::span<const Real> bias);

struct AffineGrads {
  Vector x;
  Matrix weights;
  Vector bias;
};
AffineGrads affine_backward(std::span<const Real> x, const Matrix& weights,
                            std::span<const Real> grad_out);

// Central-difference check of `analytic` against f at `point`. Returns
// max_i |analytic_i - numeric_i| / max(1, |analytic_i|). eps must lie in
// [1e-6, 1e-3].
Real grad_check(const std::function<Real(std::span<const Real>)>& f,
                std::span<const Real> point, std::span<const Real> analytic, Real eps);

}  // namespace tagsurv::numeric
