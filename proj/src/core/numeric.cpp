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

#include "tagsurv/numeric.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

#include "tagsurv/error.hpp"

namespace tagsurv::numeric {

namespace {

std::string shape(std::size_t r, std::size_t c) {
  return std::to_string(r) + "x" + std::to_string(c);
}

void require(bool ok, const std::string& what) {
  if (!ok) throw ValidationError(what);
}

}  // namespace

Matrix::Matrix(std::size_t rows, std::size_t cols, Real fill)
    : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<Real> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  require(data_.size() == rows * cols, "shape error: data length does not match " + shape(rows, cols));
}

Matrix::Matrix(std::initializer_list<std::initializer_list<Real>> rows) {
  rows_ = rows.size();
  cols_ = rows_ == 0 ? 0 : rows.begin()->size();
  data_.reserve(rows_ * cols_);
  for (const auto& r : rows) {
    require(r.size() == cols_, "shape error: ragged matrix literal");
    data_.insert(data_.end(), r.begin(), r.end());
  }
}

void Matrix::fill(Real v) { std::fill(data_.begin(), data_.end(), v); }

bool Matrix::all_finite() const { return numeric::all_finite(data_); }

void write_matrix(std::ostream& out, const Matrix& m) {
  out << m.rows() << ' ' << m.cols() << '\n';
  char buf[32];
  for (std::size_t r = 0; r < m.rows(); ++r) {
    for (std::size_t c = 0; c < m.cols(); ++c) {
      auto res = std::to_chars(buf, buf + sizeof buf, m(r, c));
      if (c) out << ' ';
      out.write(buf, res.ptr - buf);
    }
    out << '\n';
  }
}

Matrix read_matrix(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw ValidationError("matrix: missing header");
  std::istringstream hdr(line);
  std::size_t rows = 0, cols = 0;
  if (!(hdr >> rows >> cols)) throw ValidationError("matrix: bad header '" + line + "'");
  std::vector<Real> data;
  data.reserve(rows * cols);
  for (std::size_t r = 0; r < rows; ++r) {
    if (!std::getline(in, line)) throw ValidationError("matrix: truncated at row " + std::to_string(r));
    const char* p = line.data();
    const char* end = p + line.size();
    std::size_t got = 0;
    while (p < end) {
      while (p < end && *p == ' ') ++p;
      if (p == end) break;
      Real v = 0;
      auto res = std::from_chars(p, end, v);
      if (res.ec != std::errc()) throw ValidationError("matrix: bad value in row " + std::to_string(r));
      data.push_back(v);
      ++got;
      p = res.ptr;
    }
    if (got != cols) throw ValidationError("matrix: row " + std::to_string(r) + " has wrong width");
  }
  Matrix m(rows, cols, std::move(data));
  if (!m.all_finite()) throw ValidationError("matrix: non-finite value");
  return m;
}

Real dot(std::span<const Real> a, std::span<const Real> b) {
  Real s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

Real norm(std::span<const Real> a) { return std::sqrt(dot(a, a)); }

bool all_finite(std::span<const Real> v) {
  return std::all_of(v.begin(), v.end(), [](Real x) { return std::isfinite(x); });
}

void RowGrads::add(std::size_t r, std::span<const Real> grad) {
  auto dst = row(r);
  for (std::size_t i = 0; i < cols_; ++i) dst[i] += grad[i];
}

std::span<Real> RowGrads::row(std::size_t r) {
  auto [it, inserted] = rows_.try_emplace(r);
  if (inserted) it->second.assign(cols_, 0.0);
  return it->second;
}

void RowGrads::merge(const RowGrads& other) {
  for (const auto& [r, g] : other.rows_) add(r, g);
}

RowGrads reduce_shards(std::span<const RowGrads> shards) {
  RowGrads out(shards.empty() ? 0 : shards.front().cols());
  for (const auto& s : shards) out.merge(s);
  return out;
}

Matrix embed_lookup(std::span<const std::int32_t> ids, const Matrix& table) {
  Matrix out(ids.size(), table.cols());
  for (std::size_t i = 0; i < ids.size(); ++i) {
    const auto id = ids[i];
    if (id == kPadId) continue;
    if (id < 0 || static_cast<std::size_t>(id) >= table.rows())
      throw ValidationError("index error: id " + std::to_string(id) + " outside table of " +
                            std::to_string(table.rows()) + " rows");
    std::copy_n(table.row(id).begin(), table.cols(), out.row(i).begin());
  }
  return out;
}

void embed_lookup_backward(std::span<const std::int32_t> ids, const Matrix& grad_out,
                           RowGrads& grad_table) {
  for (std::size_t i = 0; i < ids.size(); ++i)
    if (ids[i] != kPadId) grad_table.add(static_cast<std::size_t>(ids[i]), grad_out.row(i));
}

void embed_lookup_backward(std::span<const std::int32_t> ids, const Matrix& grad_out,
                           Matrix& grad_table) {
  require(grad_out.rows() == ids.size() && grad_out.cols() == grad_table.cols(),
          "shape error: embedding gradient " + shape(grad_out.rows(), grad_out.cols()));
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (ids[i] == kPadId) continue;
    require(ids[i] >= 0 && static_cast<std::size_t>(ids[i]) < grad_table.rows(),
            "index error: id " + std::to_string(ids[i]) + " outside table of " + std::to_string(grad_table.rows()) +
                " rows");
    auto dst = grad_table.row(static_cast<std::size_t>(ids[i]));
    auto src = grad_out.row(i);
    for (std::size_t j = 0; j < dst.size(); ++j) dst[j] += src[j];
  }
}

namespace {

std::size_t window_of(const Matrix& input, const Matrix& weights) {
  const std::size_t d = input.cols();
  require(d > 0 && weights.rows() % d == 0 && weights.rows() > 0,
          "shape error: conv weights " + shape(weights.rows(), weights.cols()) +
              " incompatible with input width " + std::to_string(d));
  return weights.rows() / d;
}

}  // namespace

Matrix conv1d(const Matrix& input, const Matrix& weights, std::span<const Real> bias) {
  require(input.rows() >= 1, "shape error: empty conv input");
  const std::size_t K = window_of(input, weights);
  const std::size_t d = input.cols(), H = weights.cols(), l = input.rows();
  require(bias.size() == H, "shape error: conv bias length");
  const auto left = static_cast<std::ptrdiff_t>(K / 2);
  Matrix out(l, H);
  for (std::size_t t = 0; t < l; ++t) {
    auto o = out.row(t);
    std::copy(bias.begin(), bias.end(), o.begin());
    for (std::size_t k = 0; k < K; ++k) {
      const auto src = static_cast<std::ptrdiff_t>(t) - left + static_cast<std::ptrdiff_t>(k);
      if (src < 0 || src >= static_cast<std::ptrdiff_t>(l)) continue;
      auto x = input.row(static_cast<std::size_t>(src));
      for (std::size_t j = 0; j < d; ++j) {
        const Real xv = x[j];
        if (xv == 0.0) continue;
        auto w = weights.row(k * d + j);
        for (std::size_t h = 0; h < H; ++h) o[h] += xv * w[h];
      }
    }
  }
  return out;
}

ConvGrads conv1d_backward(const Matrix& input, const Matrix& weights, const Matrix& grad_out) {
  const std::size_t K = window_of(input, weights);
  const std::size_t d = input.cols(), H = weights.cols(), l = input.rows();
  require(grad_out.rows() == l && grad_out.cols() == H, "shape error: conv grad_out");
  ConvGrads g{Matrix(l, d), Matrix(weights.rows(), H), Vector(H, 0.0)};
  const auto left = static_cast<std::ptrdiff_t>(K / 2);
  for (std::size_t t = 0; t < l; ++t) {
    auto go = grad_out.row(t);
    for (std::size_t h = 0; h < H; ++h) g.bias[h] += go[h];
    for (std::size_t k = 0; k < K; ++k) {
      const auto src = static_cast<std::ptrdiff_t>(t) - left + static_cast<std::ptrdiff_t>(k);
      if (src < 0 || src >= static_cast<std::ptrdiff_t>(l)) continue;
      auto x = input.row(static_cast<std::size_t>(src));
      auto gx = g.input.row(static_cast<std::size_t>(src));
      for (std::size_t j = 0; j < d; ++j) {
        auto w = weights.row(k * d + j);
        auto gw = g.weights.row(k * d + j);
        Real acc = 0;
        for (std::size_t h = 0; h < H; ++h) {
          acc += w[h] * go[h];
          gw[h] += x[j] * go[h];
        }
        gx[j] += acc;
      }
    }
  }
  return g;
}

Matrix tanh_map(const Matrix& x) {
  Matrix y = x;
  for (auto& v : y.values()) v = std::tanh(v);
  return y;
}

Vector tanh_map(std::span<const Real> x) {
  Vector y(x.size());
  std::transform(x.begin(), x.end(), y.begin(), [](Real v) { return std::tanh(v); });
  return y;
}

Matrix tanh_backward(const Matrix& y, const Matrix& grad_out) {
  require(y.rows() == grad_out.rows() && y.cols() == grad_out.cols(), "shape error: tanh grad");
  Matrix g = grad_out;
  auto yv = y.values();
  auto gv = g.values();
  for (std::size_t i = 0; i < gv.size(); ++i) gv[i] *= 1.0 - yv[i] * yv[i];
  return g;
}

Vector tanh_backward(std::span<const Real> y, std::span<const Real> grad_out) {
  require(y.size() == grad_out.size(), "shape error: tanh grad");
  Vector g(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) g[i] = grad_out[i] * (1.0 - y[i] * y[i]);
  return g;
}

PoolResult maxpool_time(const Matrix& x, const std::vector<bool>& mask) {
  require(mask.empty() || mask.size() == x.rows(), "shape error: pool mask length");
  PoolResult p{Vector(x.cols(), 0.0), std::vector<std::size_t>(x.cols(), 0)};
  bool any = false;
  for (std::size_t r = 0; r < x.rows(); ++r) {
    if (!mask.empty() && !mask[r]) continue;
    auto row = x.row(r);
    for (std::size_t c = 0; c < x.cols(); ++c) {
      if (!any || row[c] > p.values[c]) {
        p.values[c] = row[c];
        p.argmax[c] = r;
      }
    }
    any = true;
  }
  if (!any) throw ValidationError("empty pool");
  return p;
}

Matrix maxpool_backward(const PoolResult& pool, std::size_t rows, std::span<const Real> grad_out) {
  require(grad_out.size() == pool.values.size(), "shape error: pool grad_out");
  Matrix g(rows, pool.values.size());
  for (std::size_t c = 0; c < grad_out.size(); ++c) g(pool.argmax[c], c) += grad_out[c];
  return g;
}

Vector affine(std::span<const Real> x, const Matrix& weights, std::span<const Real> bias) {
  require(x.size() == weights.rows() && bias.size() == weights.cols(),
          "shape error: affine x[" + std::to_string(x.size()) + "] W " +
              shape(weights.rows(), weights.cols()) + " b[" + std::to_string(bias.size()) + "]");
  Vector y(bias.begin(), bias.end());
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (x[i] == 0.0) continue;
    auto w = weights.row(i);
    for (std::size_t j = 0; j < y.size(); ++j) y[j] += x[i] * w[j];
  }
  return y;
}

AffineGrads affine_backward(std::span<const Real> x, const Matrix& weights,
                            std::span<const Real> grad_out) {
  require(x.size() == weights.rows() && grad_out.size() == weights.cols(),
          "shape error: affine grad");
  AffineGrads g{Vector(x.size(), 0.0), Matrix(weights.rows(), weights.cols()),
                Vector(grad_out.begin(), grad_out.end())};
  for (std::size_t i = 0; i < x.size(); ++i) {
    g.x[i] = dot(weights.row(i), grad_out);
    auto gw = g.weights.row(i);
    for (std::size_t j = 0; j < grad_out.size(); ++j) gw[j] = x[i] * grad_out[j];
  }
  return g;
}

Real grad_check(const std::function<Real(std::span<const Real>)>& f,
                std::span<const Real> point, std::span<const Real> analytic, Real eps) {
  if (!(eps >= 1e-6 && eps <= 1e-3)) throw ValidationError("grad_check: eps outside [1e-6, 1e-3]");
  require(point.size() == analytic.size(), "shape error: grad_check analytic length");
  if (!all_finite(point) || !all_finite(analytic))
    throw ValidationError("grad_check: non-finite input");
  Vector p(point.begin(), point.end());
  Real worst = 0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const Real saved = p[i];
    p[i] = saved + eps;
    const Real up = f(p);
    p[i] = saved - eps;
    const Real down = f(p);
    p[i] = saved;
    if (!std::isfinite(up) || !std::isfinite(down))
      throw ValidationError("grad_check: non-finite function value");
    const Real numeric = (up - down) / (2 * eps);
    worst = std::max(worst, std::abs(analytic[i] - numeric) / std::max<Real>(1.0, std::abs(analytic[i])));
  }
  return worst;
}

}  // namespace tagsurv::numeric
