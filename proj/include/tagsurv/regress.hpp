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

// Elastic net by cyclic coordinate descent:
//
//   min_{w,b}  sum_s (w . x_s + b - y_s)^2 + l1 * sum|w_k| + l2 * sum w_k^2
//
// Features are standardised internally (zero mean, unit population
// variance); weights live in standardised space and predict() applies the
// same transform.

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "tagsurv/numeric.hpp"

namespace tagsurv::regress {

using numeric::Matrix;
using numeric::Real;
using numeric::Vector;

inline constexpr double kLambdaMin = 1e-5;
inline constexpr double kLambdaMax = 1e2;

struct ElasticNetModel {
  Vector weights;  // standardised space
  Real intercept = 0;
  Real lambda1 = 0;
  Real lambda2 = 0;
  Vector feature_means;
  Vector feature_scales;  // 1 for zero-variance features
  std::vector<std::string> feature_names;

  // Coefficients on the original feature scale.
  Vector raw_weights() const;
  Real raw_intercept() const;

  // "lambda1 lambda2 beta", then "name weight mean scale" per feature.
  void save(std::ostream& out) const;
  static ElasticNetModel load(std::istream& in);
};

struct FitOptions {
  Real tolerance = 1e-8;  // max absolute coordinate change per sweep
  std::size_t max_sweeps = 10000;
  // When set, receives the objective after every sweep.
  std::vector<Real>* objective_trace = nullptr;
};

ElasticNetModel fit(const Matrix& X, std::span<const Real> y, Real lambda1, Real lambda2,
                    const FitOptions& options = {});

Real predict(const ElasticNetModel& model, std::span<const Real> x);

// Penalised objective of `model` on (X, y), in standardised space.
Real objective(const ElasticNetModel& model, const Matrix& X, std::span<const Real> y);

struct RegionSplit {
  std::vector<std::string> train, validation, test;
};

inline constexpr std::size_t kValidationRegions = 4;
inline constexpr std::size_t kTestRegions = 8;

RegionSplit split_regions(std::vector<std::string> regions, std::uint64_t seed);

struct SearchTrial {
  std::size_t index = 0;
  Real lambda1 = 0;
  Real lambda2 = 0;
  Real cv_mae = 0;          // k-fold MAE over training regions
  Real validation_mae = 0;  // fit on all training regions
};

struct SearchResult {
  ElasticNetModel model;  // refit on train + validation
  SearchTrial best;
  std::vector<SearchTrial> trials;
};

// Log-uniform draws of (l1, l2) on [kLambdaMin, kLambdaMax]. Trials are
// ranked by (validation MAE, l1, l2, index).
SearchResult random_search(const Matrix& X, std::span<const Real> y, std::span<const std::string> regions,
                           const RegionSplit& split, std::size_t trials, std::uint64_t seed,
                           std::size_t folds = 5, std::size_t threads = 1);

// Rows of X / entries of y for the named regions.
Matrix select_rows(const Matrix& X, std::span<const std::string> regions, std::span<const std::string> pick);
Vector select_values(std::span<const Real> y, std::span<const std::string> regions,
                     std::span<const std::string> pick);

}  // namespace tagsurv::regress
