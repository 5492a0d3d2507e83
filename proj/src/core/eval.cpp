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

#include "tagsurv/eval.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numeric>
#include <ostream>

#include "tagsurv/error.hpp"

namespace tagsurv::eval {

namespace {

std::size_t hits(const RankingJudgment& j, std::size_t k) {
  std::size_t h = 0;
  const std::size_t n = std::min(k, j.ranked.size());
  for (std::size_t i = 0; i < n; ++i)
    if (std::find(j.gold.begin(), j.gold.end(), j.ranked[i]) != j.gold.end()) ++h;
  return h;
}

void check_judgments(std::span<const RankingJudgment> judgments, std::size_t k) {
  if (judgments.empty()) throw ValidationError("empty judgment set");
  if (k < 1) throw ValidationError("k must be >= 1");
  for (const auto& j : judgments)
    if (j.gold.empty()) throw ValidationError("judgment with empty gold set");
}

void check_pair(std::span<const Real> a, std::span<const Real> b) {
  if (a.size() != b.size()) throw ValidationError("metric inputs differ in length");
  if (a.size() < 2) throw ValidationError("metric needs at least 2 values");
}

}  // namespace

Real precision_at_k(std::span<const RankingJudgment> judgments, std::size_t k) {
  check_judgments(judgments, k);
  Real s = 0;
  for (const auto& j : judgments) s += static_cast<Real>(hits(j, k)) / static_cast<Real>(k);
  return s / static_cast<Real>(judgments.size());
}

Real recall_at_k(std::span<const RankingJudgment> judgments, std::size_t k) {
  check_judgments(judgments, k);
  Real s = 0;
  for (const auto& j : judgments) s += static_cast<Real>(hits(j, k)) / static_cast<Real>(j.gold.size());
  return s / static_cast<Real>(judgments.size());
}

BinaryMetrics precision_recall_binary(const std::vector<bool>& predictions, const std::vector<bool>& labels) {
  if (predictions.size() != labels.size()) throw ValidationError("predictions and labels differ in length");
  if (labels.empty()) throw ValidationError("empty label set");
  BinaryMetrics m;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (predictions[i] && labels[i]) ++m.tp;
    else if (predictions[i]) ++m.fp;
    else if (labels[i]) ++m.fn;
    else ++m.tn;
  }
  if (m.tp + m.fp > 0) m.precision = static_cast<Real>(m.tp) / static_cast<Real>(m.tp + m.fp);
  if (m.tp + m.fn > 0) m.recall = static_cast<Real>(m.tp) / static_cast<Real>(m.tp + m.fn);
  m.prevalence = static_cast<Real>(m.tp + m.fn) / static_cast<Real>(labels.size());
  return m;
}

Real mae(std::span<const Real> pred, std::span<const Real> actual) {
  check_pair(pred, actual);
  Real s = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) s += std::abs(pred[i] - actual[i]);
  return s / static_cast<Real>(pred.size());
}

Real pearson(std::span<const Real> a, std::span<const Real> b) {
  check_pair(a, b);
  const Real n = static_cast<Real>(a.size());
  const Real ma = std::accumulate(a.begin(), a.end(), 0.0) / n;
  const Real mb = std::accumulate(b.begin(), b.end(), 0.0) / n;
  Real sab = 0, saa = 0, sbb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const Real da = a[i] - ma, db = b[i] - mb;
    sab += da * db;
    saa += da * da;
    sbb += db * db;
  }
  if (saa == 0 || sbb == 0) throw ValidationError("degenerate input");
  return std::clamp(sab / std::sqrt(saa * sbb), -1.0, 1.0);
}

std::vector<Real> average_ranks(std::span<const Real> v) {
  std::vector<std::size_t> order(v.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) { return v[x] < v[y]; });
  std::vector<Real> ranks(v.size());
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j + 1 < order.size() && v[order[j + 1]] == v[order[i]]) ++j;
    const Real avg = (static_cast<Real>(i) + static_cast<Real>(j)) / 2.0 + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = avg;
    i = j + 1;
  }
  return ranks;
}

Real spearman(std::span<const Real> a, std::span<const Real> b) {
  check_pair(a, b);
  const auto ra = average_ranks(a);
  const auto rb = average_ranks(b);
  return pearson(ra, rb);
}

std::vector<RiskFactor> risk_factor_report(const Matrix& features, std::span<const Real> targets,
                                           std::span<const std::string> feature_names) {
  if (features.rows() < 3) throw ValidationError("risk factor report needs at least 3 regions");
  if (targets.size() != features.rows()) throw ValidationError("targets and feature rows differ in length");
  if (feature_names.size() != features.cols()) throw ValidationError("feature names and columns differ in count");
  std::vector<RiskFactor> out;
  std::vector<Real> column(features.rows());
  for (std::size_t j = 0; j < features.cols(); ++j) {
    for (std::size_t i = 0; i < features.rows(); ++i) column[i] = features(i, j);
    RiskFactor rf{feature_names[j], std::nullopt, features.rows()};
    const bool constant = std::all_of(column.begin(), column.end(), [&](Real v) { return v == column[0]; });
    if (!constant) rf.spearman = spearman(column, targets);
    out.push_back(std::move(rf));
  }
  std::stable_sort(out.begin(), out.end(), [](const RiskFactor& a, const RiskFactor& b) {
    if (a.spearman.has_value() != b.spearman.has_value()) return a.spearman.has_value();
    if (a.spearman && *a.spearman != *b.spearman) return *a.spearman > *b.spearman;
    return a.feature < b.feature;
  });
  return out;
}

void write_risk_report(std::ostream& out, const std::vector<RiskFactor>& report) {
  out << "feature,spearman,n_regions\n";
  char buf[32];
  for (const auto& r : report) {
    out << r.feature << ',';
    if (r.spearman) {
      auto res = std::to_chars(buf, buf + sizeof buf, *r.spearman);
      out.write(buf, res.ptr - buf);
    }
    out << ',' << r.n_regions << '\n';
  }
}

}  // namespace tagsurv::eval
