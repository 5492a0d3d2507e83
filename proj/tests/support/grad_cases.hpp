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

// Gradient checks at seeded random points, shared by the unit and
// acceptance suites. Each entry is the worst relative error seen for one
// operation.

#include <algorithm>
#include <cstdint>
#include <map>
#include <string>

#include "model_fixture.hpp"
#include "tagsurv/numeric.hpp"
#include "tagsurv/random.hpp"
#include "tagsurv/tagspace.hpp"

namespace tagsurv::fixture {

using GradReport = std::map<std::string, double>;

namespace detail {

inline numeric::Matrix random_matrix(Rng& rng, std::size_t r, std::size_t c, double scale = 1.0) {
  numeric::Matrix m(r, c);
  for (auto& v : m.values()) v = rng.uniform(-scale, scale);
  return m;
}

inline Vector random_vector(Rng& rng, std::size_t n, double scale = 1.0) {
  Vector v(n);
  for (auto& x : v) x = rng.uniform(-scale, scale);
  return v;
}

inline Real weighted_sum(const numeric::Matrix& m, const numeric::Matrix& w) {
  Real s = 0;
  for (std::size_t i = 0; i < m.size(); ++i) s += m.values()[i] * w.values()[i];
  return s;
}

inline numeric::Matrix with_values(std::size_t r, std::size_t c, std::span<const Real> v) {
  return numeric::Matrix(r, c, Vector(v.begin(), v.end()));
}

inline void keep_worst(GradReport& report, const std::string& name, double err) {
  report[name] = std::max(report[name], err);
}

}  // namespace detail

// embed_lookup, conv1d, tanh_map, maxpool_time and affine.
inline GradReport kernel_grad_errors(std::uint64_t seed, int points) {
  using namespace numeric;
  using namespace detail;
  Rng rng(seed);
  GradReport report;
  for (int trial = 0; trial < points; ++trial) {
    const std::size_t l = 1 + rng.uniform_index(5), d = 1 + rng.uniform_index(3), k = 1 + rng.uniform_index(3),
                      h = 1 + rng.uniform_index(4);
    const auto x = random_matrix(rng, l, d);
    const auto w = random_matrix(rng, k * d, h);
    const auto b = random_vector(rng, h);
    const auto r = random_matrix(rng, l, h);
    const auto cg = conv1d_backward(x, w, r);
    double conv = grad_check([&](std::span<const Real> p) { return weighted_sum(conv1d(with_values(l, d, p), w, b), r); },
                             x.values(), cg.input.values(), 1e-5);
    conv = std::max(conv, grad_check([&](std::span<const Real> p) { return weighted_sum(conv1d(x, with_values(k * d, h, p), b), r); },
                                     w.values(), cg.weights.values(), 1e-5));
    conv = std::max(conv, grad_check([&](std::span<const Real> p) { return weighted_sum(conv1d(x, w, p), r); }, b, cg.bias, 1e-5));
    keep_worst(report, "conv1d", conv);

    const auto t = random_matrix(rng, l, h, 2.0);
    const auto tg = tanh_backward(tanh_map(t), r);
    keep_worst(report, "tanh_map",
               grad_check([&](std::span<const Real> p) { return weighted_sum(tanh_map(with_values(l, h, p)), r); },
                          t.values(), tg.values(), 1e-5));

    const auto pool = maxpool_time(t);
    const auto rv = random_vector(rng, h);
    const auto pg = maxpool_backward(pool, l, rv);
    keep_worst(report, "maxpool_time",
               grad_check([&](std::span<const Real> p) { return dot(maxpool_time(with_values(l, h, p)).values, rv); },
                          t.values(), pg.values(), 1e-6));

    const auto xa = random_vector(rng, h);
    const auto wa = random_matrix(rng, h, d);
    const auto ba = random_vector(rng, d);
    const auto ra = random_vector(rng, d);
    const auto ag = affine_backward(xa, wa, ra);
    double aff = grad_check([&](std::span<const Real> p) { return dot(affine(p, wa, ba), ra); }, xa, ag.x, 1e-5);
    aff = std::max(aff, grad_check([&](std::span<const Real> p) { return dot(affine(xa, with_values(h, d, p), ba), ra); },
                                   wa.values(), ag.weights.values(), 1e-5));
    aff = std::max(aff, grad_check([&](std::span<const Real> p) { return dot(affine(xa, wa, p), ra); }, ba, ag.bias, 1e-5));
    keep_worst(report, "affine", aff);

    const auto table = random_matrix(rng, 6, d);
    std::vector<std::int32_t> ids(l);
    for (auto& id : ids) id = rng.bernoulli(0.2) ? kPadId : static_cast<std::int32_t>(rng.uniform_index(6));
    const auto re = random_matrix(rng, l, d);
    Matrix eg(6, d);
    embed_lookup_backward(ids, re, eg);
    keep_worst(report, "embed_lookup",
               grad_check([&](std::span<const Real> p) { return weighted_sum(embed_lookup(ids, with_values(6, d, p)), re); },
                          table.values(), eg.values(), 1e-5));
  }
  return report;
}

// Full encoder, WARP hinge and binary hinge over every parameter. Points
// where a hinge is inactive are redrawn so each operation gets `points`
// checks.
inline GradReport model_grad_errors(std::uint64_t seed, int points) {
  using namespace tagspace;
  Rng rng(seed);
  GradReport report{{"encode", 0.0}, {"warp_hinge", 0.0}, {"binary_hinge", 0.0}};
  int encode_n = 0, warp_n = 0, binary_n = 0;
  for (std::uint64_t trial = 0; encode_n < points || warp_n < points || binary_n < points; ++trial) {
    Shape s;
    auto p = random_params(rng, s, Objective::warp, 3.0);
    const auto ids = random_ids(rng, s);
    const auto flat = flatten(p);

    if (encode_n < points) {
      Vector r(s.dim);
      for (auto& v : r) v = rng.uniform(-1, 1);
      Gradients ge(p);
      encode_backward(encode_traced(ids, p), p, r, ge);
      detail::keep_worst(report, "encode",
                         numeric::grad_check(
                             [&](std::span<const Real> x) { return numeric::dot(encode(ids, unflatten(p, x)), r); },
                             flat, flatten(ge, p), 1e-5));
      ++encode_n;
    }

    const EncodedTweet tw{ids, {static_cast<std::uint32_t>(rng.uniform_index(s.pool))}, rng.bernoulli(0.5)};
    if (warp_n < points) {
      Gradients gw(p);
      Rng step(trial);
      const auto res = warp_gradient(tw, p, step, gw);
      if (res.updated) {
        detail::keep_worst(report, "warp_hinge",
                           numeric::grad_check(
                               [&](std::span<const Real> x) {
                                 const auto q = unflatten(p, x);
                                 const auto e = encode(ids, q);
                                 return std::max<Real>(0, q.hyper.margin - score(e, res.positive, q) +
                                                              score(e, res.negative, q));
                               },
                               flat, flatten(gw, p), 1e-5));
        ++warp_n;
      }
    }

    if (binary_n < points) {
      Gradients gb(p);
      if (binary_gradient(tw, p, gb).updated) {
        const Real y = tw.food ? 1 : -1;
        detail::keep_worst(report, "binary_hinge",
                           numeric::grad_check(
                               [&](std::span<const Real> x) {
                                 const auto q = unflatten(p, x);
                                 return std::max<Real>(0, q.hyper.margin - y * binary_score(encode(ids, q), q));
                               },
                               flat, flatten(gb, p), 1e-5));
        ++binary_n;
      }
    }
  }
  return report;
}

}  // namespace tagsurv::fixture
