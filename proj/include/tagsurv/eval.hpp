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

// Ranking, classification, regression and correlation metrics. Metrics
// with a zero denominator come back as std::nullopt rather than 0.

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "tagsurv/numeric.hpp"

namespace tagsurv::eval {

using numeric::Matrix;
using numeric::Real;

struct RankingJudgment {
  std::vector<std::uint32_t> ranked;  // predicted tags, best first
  std::vector<std::uint32_t> gold;    // T+, non-empty
};

// Mean over tweets of |top-k ∩ gold| / k.
Real precision_at_k(std::span<const RankingJudgment> judgments, std::size_t k);
// Mean over tweets of |top-k ∩ gold| / |gold|.
Real recall_at_k(std::span<const RankingJudgment> judgments, std::size_t k);

struct BinaryMetrics {
  std::optional<Real> precision;
  std::optional<Real> recall;
  Real prevalence = 0;  // share of positive labels
  std::size_t tp = 0, fp = 0, fn = 0, tn = 0;
};
BinaryMetrics precision_recall_binary(const std::vector<bool>& predictions, const std::vector<bool>& labels);

Real mae(std::span<const Real> pred, std::span<const Real> actual);
Real pearson(std::span<const Real> a, std::span<const Real> b);
// Average ranks (1-based) with ties sharing the mean of their positions.
std::vector<Real> average_ranks(std::span<const Real> v);
Real spearman(std::span<const Real> a, std::span<const Real> b);

struct RiskFactor {
  std::string feature;
  std::optional<Real> spearman;  // nullopt for constant features
  std::size_t n_regions = 0;
};

// Per-feature Spearman against the targets, sorted by correlation
// descending (missing last), ties by feature name.
std::vector<RiskFactor> risk_factor_report(const Matrix& features, std::span<const Real> targets,
                                           std::span<const std::string> feature_names);

// CSV "feature,spearman,n_regions"; missing correlations are left empty.
void write_risk_report(std::ostream& out, const std::vector<RiskFactor>& report);

}  // namespace tagsurv::eval
