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

#include "tagsurv/regress.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>
#include <thread>
#include <unordered_map>

#include "tagsurv/error.hpp"
#include "tagsurv/random.hpp"

namespace tagsurv::regress {

namespace {

Real soft_threshold(Real v, Real t) {
  if (v > t) return v - t;
  if (v < -t) return v + t;
  return 0.0;
}

Real mae_of(const ElasticNetModel& m, const Matrix& X, std::span<const Real> y) {
  Real s = 0;
  for (std::size_t i = 0; i < X.rows(); ++i) s += std::abs(predict(m, X.row(i)) - y[i]);
  return s / static_cast<Real>(X.rows());
}

std::string fmt(double v) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

bool zero_variance(Real sd, Real mean) { return sd <= 1e-12 * std::max<Real>(1.0, std::abs(mean)); }

}  // namespace

Vector ElasticNetModel::raw_weights() const {
  Vector w(weights.size());
  for (std::size_t j = 0; j < w.size(); ++j) w[j] = weights[j] / feature_scales[j];
  return w;
}

Real ElasticNetModel::raw_intercept() const {
  Real b = intercept;
  for (std::size_t j = 0; j < weights.size(); ++j) b -= weights[j] * feature_means[j] / feature_scales[j];
  return b;
}

void ElasticNetModel::save(std::ostream& out) const {
  out << fmt(lambda1) << ' ' << fmt(lambda2) << ' ' << fmt(intercept) << '\n';
  for (std::size_t j = 0; j < weights.size(); ++j) {
    const std::string name = j < feature_names.size() ? feature_names[j] : "f" + std::to_string(j + 1);
    out << name << ' ' << fmt(weights[j]) << ' ' << fmt(feature_means[j]) << ' ' << fmt(feature_scales[j]) << '\n';
  }
}

ElasticNetModel ElasticNetModel::load(std::istream& in) {
  ElasticNetModel m;
  std::string line;
  if (!std::getline(in, line)) throw ValidationError("model: missing 'lambda1 lambda2 beta' line");
  {
    std::istringstream hdr(line);
    if (!(hdr >> m.lambda1 >> m.lambda2 >> m.intercept))
      throw ValidationError("model: first line must be 'lambda1 lambda2 beta'");
  }
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::istringstream row(line);
    std::string name;
    Real w, mean, scale;
    if (!(row >> name >> w >> mean >> scale) || !(scale > 0))
      throw ValidationError("model line " + std::to_string(lineno) + ": expected 'feature_name weight mean scale'");
    m.feature_names.push_back(name);
    m.weights.push_back(w);
    m.feature_means.push_back(mean);
    m.feature_scales.push_back(scale);
  }
  return m;
}

Real predict(const ElasticNetModel& model, std::span<const Real> x) {
  if (x.size() != model.weights.size())
    throw ValidationError("predict: feature vector has " + std::to_string(x.size()) + " entries, model expects " +
                          std::to_string(model.weights.size()));
  Real y = model.intercept;
  for (std::size_t j = 0; j < x.size(); ++j)
    y += model.weights[j] * (x[j] - model.feature_means[j]) / model.feature_scales[j];
  return y;
}

Real objective(const ElasticNetModel& model, const Matrix& X, std::span<const Real> y) {
  Real loss = 0;
  for (std::size_t i = 0; i < X.rows(); ++i) {
    const Real r = predict(model, X.row(i)) - y[i];
    loss += r * r;
  }
  Real l1 = 0, l2 = 0;
  for (Real w : model.weights) {
    l1 += std::abs(w);
    l2 += w * w;
  }
  return loss + model.lambda1 * l1 + model.lambda2 * l2;
}

ElasticNetModel fit(const Matrix& X, std::span<const Real> y, Real lambda1, Real lambda2,
                    const FitOptions& options) {
  const std::size_t n = X.rows(), p = X.cols();
  if (n < 2) throw ValidationError("fit: need at least 2 regions");
  if (y.size() != n) throw ValidationError("fit: target count does not match feature rows");
  if (!X.all_finite() || !numeric::all_finite(y)) throw ValidationError("fit: non-finite input");
  if (!(lambda1 >= 0) || !(lambda2 >= 0) || !std::isfinite(lambda1) || !std::isfinite(lambda2))
    throw ValidationError("fit: regularizers must be finite and non-negative");

  ElasticNetModel m;
  m.lambda1 = lambda1;
  m.lambda2 = lambda2;
  m.weights.assign(p, 0.0);
  m.feature_means.assign(p, 0.0);
  m.feature_scales.assign(p, 1.0);
  std::vector<bool> fixed(p, false);

  Matrix Z(n, p);
  for (std::size_t j = 0; j < p; ++j) {
    Real mean = 0;
    for (std::size_t i = 0; i < n; ++i) mean += X(i, j);
    mean /= static_cast<Real>(n);
    Real var = 0;
    for (std::size_t i = 0; i < n; ++i) var += (X(i, j) - mean) * (X(i, j) - mean);
    const Real sd = std::sqrt(var / static_cast<Real>(n));
    m.feature_means[j] = mean;
    if (zero_variance(sd, mean)) {
      fixed[j] = true;
      continue;
    }
    m.feature_scales[j] = sd;
    for (std::size_t i = 0; i < n; ++i) Z(i, j) = (X(i, j) - mean) / sd;
  }
  Vector col_sq(p, 0.0);
  for (std::size_t j = 0; j < p; ++j)
    for (std::size_t i = 0; i < n; ++i) col_sq[j] += Z(i, j) * Z(i, j);

  Real ysum = 0;
  for (Real v : y) ysum += v;
  m.intercept = ysum / static_cast<Real>(n);
  Vector r(n);
  for (std::size_t i = 0; i < n; ++i) r[i] = y[i] - m.intercept;

  auto current_objective = [&] {
    Real loss = 0, l1 = 0, l2 = 0;
    for (Real v : r) loss += v * v;
    for (Real w : m.weights) {
      l1 += std::abs(w);
      l2 += w * w;
    }
    return loss + lambda1 * l1 + lambda2 * l2;
  };

  const Real threshold = lambda1 / 2;
  for (std::size_t sweep = 0; sweep < options.max_sweeps; ++sweep) {
    Real max_change = 0;
    for (std::size_t j = 0; j < p; ++j) {
      if (fixed[j]) continue;
      Real rho = 0;
      for (std::size_t i = 0; i < n; ++i) rho += Z(i, j) * r[i];
      rho += col_sq[j] * m.weights[j];
      const Real updated = soft_threshold(rho, threshold) / (col_sq[j] + lambda2);
      const Real delta = updated - m.weights[j];
      if (delta != 0) {
        for (std::size_t i = 0; i < n; ++i) r[i] -= delta * Z(i, j);
        m.weights[j] = updated;
      }
      max_change = std::max(max_change, std::abs(delta));
    }
    Real shift = 0;
    for (Real v : r) shift += v;
    shift /= static_cast<Real>(n);
    if (shift != 0) {
      m.intercept += shift;
      for (auto& v : r) v -= shift;
    }
    max_change = std::max(max_change, std::abs(shift));
    if (options.objective_trace) options.objective_trace->push_back(current_objective());
    if (max_change < options.tolerance) break;
  }
  return m;
}

RegionSplit split_regions(std::vector<std::string> regions, std::uint64_t seed) {
  const std::size_t held = kValidationRegions + kTestRegions;
  if (regions.size() < held + 1)
    throw ValidationError("split_regions: need at least " + std::to_string(held + 1) + " regions, got " +
                          std::to_string(regions.size()));
  std::sort(regions.begin(), regions.end());
  if (std::adjacent_find(regions.begin(), regions.end()) != regions.end())
    throw ValidationError("split_regions: duplicate region code");
  Rng(seed).shuffle(regions.begin(), regions.end());
  RegionSplit s;
  s.validation.assign(regions.begin(), regions.begin() + kValidationRegions);
  s.test.assign(regions.begin() + kValidationRegions, regions.begin() + held);
  s.train.assign(regions.begin() + held, regions.end());
  std::sort(s.train.begin(), s.train.end());
  std::sort(s.validation.begin(), s.validation.end());
  std::sort(s.test.begin(), s.test.end());
  return s;
}

Matrix select_rows(const Matrix& X, std::span<const std::string> regions, std::span<const std::string> pick) {
  std::unordered_map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < regions.size(); ++i) index[regions[i]] = i;
  Matrix out(pick.size(), X.cols());
  for (std::size_t k = 0; k < pick.size(); ++k) {
    auto it = index.find(pick[k]);
    if (it == index.end()) throw ValidationError("unknown region '" + pick[k] + "'");
    std::copy_n(X.row(it->second).begin(), X.cols(), out.row(k).begin());
  }
  return out;
}

Vector select_values(std::span<const Real> y, std::span<const std::string> regions,
                     std::span<const std::string> pick) {
  std::unordered_map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < regions.size(); ++i) index[regions[i]] = i;
  Vector out;
  for (const auto& r : pick) {
    auto it = index.find(r);
    if (it == index.end()) throw ValidationError("unknown region '" + r + "'");
    out.push_back(y[it->second]);
  }
  return out;
}

SearchResult random_search(const Matrix& X, std::span<const Real> y, std::span<const std::string> regions,
                           const RegionSplit& split, std::size_t trials, std::uint64_t seed,
                           std::size_t folds, std::size_t threads) {
  if (trials < 1) throw ValidationError("random_search: trials must be >= 1");
  if (folds < 2) throw ValidationError("random_search: folds must be >= 2");
  if (X.rows() != regions.size() || y.size() != regions.size())
    throw ValidationError("random_search: features, targets and regions differ in length");
  if (!X.all_finite() || !numeric::all_finite(y)) throw ValidationError("random_search: non-finite input");
  if (split.train.size() < 2) throw ValidationError("random_search: need at least 2 training regions");
  const Matrix Xtr = select_rows(X, regions, split.train);
  const Vector ytr = select_values(y, regions, split.train);
  const Matrix Xva = select_rows(X, regions, split.validation);
  const Vector yva = select_values(y, regions, split.validation);

  SearchResult result;
  Rng rng(seed);
  const Real lo = std::log(kLambdaMin), hi = std::log(kLambdaMax);
  for (std::size_t t = 0; t < trials; ++t) {
    SearchTrial trial;
    trial.index = t;
    trial.lambda1 = std::clamp(std::exp(rng.uniform(lo, hi)), kLambdaMin, kLambdaMax);
    trial.lambda2 = std::clamp(std::exp(rng.uniform(lo, hi)), kLambdaMin, kLambdaMax);
    result.trials.push_back(trial);
  }

  const std::size_t k = std::min(folds, Xtr.rows());
  auto evaluate = [&](SearchTrial& trial) {
    Real err = 0;
    std::size_t count = 0;
    for (std::size_t f = 0; f < k; ++f) {
      std::vector<std::size_t> fit_rows, held;
      for (std::size_t i = 0; i < Xtr.rows(); ++i) (i % k == f ? held : fit_rows).push_back(i);
      if (fit_rows.size() < 2 || held.empty()) continue;
      Matrix Xf(fit_rows.size(), Xtr.cols());
      Vector yf;
      for (std::size_t a = 0; a < fit_rows.size(); ++a) {
        std::copy_n(Xtr.row(fit_rows[a]).begin(), Xtr.cols(), Xf.row(a).begin());
        yf.push_back(ytr[fit_rows[a]]);
      }
      const auto m = fit(Xf, yf, trial.lambda1, trial.lambda2);
      for (auto i : held) {
        err += std::abs(predict(m, Xtr.row(i)) - ytr[i]);
        ++count;
      }
    }
    trial.cv_mae = count ? err / static_cast<Real>(count) : 0.0;
    const auto m = fit(Xtr, ytr, trial.lambda1, trial.lambda2);
    trial.validation_mae = Xva.rows() ? mae_of(m, Xva, yva) : trial.cv_mae;
  };

  const std::size_t nthreads = std::max<std::size_t>(1, std::min(threads, trials));
  if (nthreads == 1) {
    for (auto& t : result.trials) evaluate(t);
  } else {
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < nthreads; ++w)
      pool.emplace_back([&, w] {
        for (std::size_t t = w; t < trials; t += nthreads) evaluate(result.trials[t]);
      });
    for (auto& th : pool) th.join();
  }

  result.best = *std::min_element(result.trials.begin(), result.trials.end(), [](const auto& a, const auto& b) {
    if (a.validation_mae != b.validation_mae) return a.validation_mae < b.validation_mae;
    if (a.lambda1 != b.lambda1) return a.lambda1 < b.lambda1;
    if (a.lambda2 != b.lambda2) return a.lambda2 < b.lambda2;
    return a.index < b.index;
  });

  std::vector<std::string> refit_regions = split.train;
  refit_regions.insert(refit_regions.end(), split.validation.begin(), split.validation.end());
  result.model = fit(select_rows(X, regions, refit_regions), select_values(y, regions, refit_regions),
                     result.best.lambda1, result.best.lambda2);
  return result;
}

}  // namespace tagsurv::regress
