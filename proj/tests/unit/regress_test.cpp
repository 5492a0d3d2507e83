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


#include <cmath>
#include <numeric>
#include <set>
#include <sstream>

#include "doctest.h"
#include "oracle.hpp"
#include "regress_cases.hpp"
#include "tagsurv/error.hpp"
#include "tagsurv/random.hpp"
#include "tagsurv/regress.hpp"
#include "tagsurv/synth.hpp"

using namespace tagsurv;
using namespace tagsurv::regress;
using fixture::random_instance;

namespace {

std::vector<std::string> codes(std::size_t n) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back(synth::region_code(i));
  return out;
}

double mean_of(std::span<const double> v) { return std::accumulate(v.begin(), v.end(), 0.0) / v.size(); }

}  // namespace

TEST_CASE("exact linear fit") {
  const Matrix x{{1}, {2}, {3}};
  const Vector y{1, 2, 3};
  const auto m = fit(x, y, 0, 0);
  CHECK(std::abs(m.raw_weights()[0] - 1) < 1e-8);
  CHECK(std::abs(m.raw_intercept()) < 1e-8);
  const Vector probe{2};
  CHECK(std::abs(predict(m, probe) - 2) < 1e-8);
}

TEST_CASE("full shrinkage leaves the mean") {
  const Matrix x{{1}, {2}, {3}};
  const Vector y{1, 2, 3};
  const auto m = fit(x, y, 1e6, 0);
  CHECK(m.weights[0] == 0.0);
  CHECK(m.intercept == doctest::Approx(2.0).epsilon(1e-15));
  for (std::uint64_t seed = 1; seed <= 20; ++seed) CHECK(fixture::full_shrinkage(random_instance(seed, 12, 4)));
}

TEST_CASE("least squares and ridge match the normal equations") {
  for (std::uint64_t seed = 1; seed <= 50; ++seed) {
    CHECK(fixture::ols_deviation(random_instance(seed, 20, 3)) < 1e-6);
    CHECK(fixture::ridge_deviation(random_instance(seed, 5, 3), 1.0) < 1e-6);
    CHECK(fixture::ridge_deviation(random_instance(seed + 100, 9, 4), 0.3) < 1e-6);
  }
}

TEST_CASE("objective never increases across sweeps") {
  Rng rng(99);
  for (std::uint64_t seed = 1; seed <= 50; ++seed) {
    const auto inst = random_instance(seed, 15, 5);
    const double l1 = std::exp(rng.uniform(std::log(1e-5), std::log(1e2)));
    const double l2 = std::exp(rng.uniform(std::log(1e-5), std::log(1e2)));
    CHECK(fixture::objective_increase(inst, l1, l2) <= 1e-12);
  }
}

TEST_CASE("objective trace ends at the reported objective") {
  const auto inst = random_instance(3, 10, 3);
  std::vector<double> trace;
  FitOptions options;
  options.objective_trace = &trace;
  const auto m = fit(inst.x, inst.y, 0.5, 0.25, options);
  REQUIRE(!trace.empty());
  CHECK(trace.back() == doctest::Approx(objective(m, inst.x, inst.y)).epsilon(1e-10));
}

TEST_CASE("optimality conditions hold at the solution") {
  for (std::uint64_t seed = 1; seed <= 30; ++seed) {
    const auto inst = random_instance(seed, 14, 6);
    const double l1 = 2.0 + seed, l2 = 0.1 * seed;
    const auto m = fit(inst.x, inst.y, l1, l2);
    const auto s = oracle::standardise(fixture::to_rows(inst.x));
    std::vector<double> r(inst.y.size());
    for (std::size_t i = 0; i < r.size(); ++i) r[i] = inst.y[i] - predict(m, inst.x.row(i));
    for (std::size_t j = 0; j < m.weights.size(); ++j) {
      double g = 0;
      for (std::size_t i = 0; i < r.size(); ++i) g += s.z[i][j] * r[i];
      if (m.weights[j] == 0.0) {
        CHECK(std::abs(g) <= l1 / 2 + 1e-6);
      } else {
        CHECK(std::abs(g - l2 * m.weights[j] - std::copysign(l1 / 2, m.weights[j])) < 1e-6);
      }
    }
  }
}

TEST_CASE("interpolates consistent systems with more features than regions") {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const auto inst = random_instance(seed, 4, 7);
    const auto m = fit(inst.x, inst.y, 0, 1e-10);
    for (std::size_t i = 0; i < inst.y.size(); ++i) CHECK(std::abs(predict(m, inst.x.row(i)) - inst.y[i]) < 1e-6);
  }
}

TEST_CASE("zero-variance features keep a zero weight") {
  const Matrix x{{1, 5}, {2, 5}, {4, 5}, {3, 5}};
  const Vector y{2, 4, 8, 6};
  const auto m = fit(x, y, 0, 0);
  CHECK(m.weights[1] == 0.0);
  CHECK(m.feature_scales[1] == 1.0);
  CHECK(std::abs(m.raw_weights()[0] - 2) < 1e-8);
}

TEST_CASE("fit rejects bad input") {
  const Matrix x{{1}, {2}};
  CHECK_THROWS_AS(fit(x, Vector{1, NAN}, 0, 0), ValidationError);
  CHECK_THROWS_AS(fit(x, Vector{1}, 0, 0), ValidationError);
  CHECK_THROWS_AS(fit(Matrix{{1}}, Vector{1}, 0, 0), ValidationError);
  CHECK_THROWS_AS(fit(x, Vector{1, 2}, -1, 0), ValidationError);
  CHECK_THROWS_AS(fit(Matrix{{1}, {INFINITY}}, Vector{1, 2}, 0, 0), ValidationError);
}

TEST_CASE("predict examples") {
  ElasticNetModel m;
  m.weights = {0, 0};
  m.intercept = 30;
  m.feature_means = {0, 0};
  m.feature_scales = {1, 1};
  CHECK(predict(m, Vector{7, -3}) == 30);
  ElasticNetModel unit;
  unit.weights = {1};
  unit.feature_means = {0};
  unit.feature_scales = {1};
  CHECK(predict(unit, Vector{2}) == 2);
  CHECK_THROWS_AS(predict(unit, Vector{1, 2}), ValidationError);
}

TEST_CASE("model text round trip") {
  const auto inst = random_instance(5, 10, 3);
  auto m = fit(inst.x, inst.y, 0.01, 0.02);
  m.feature_names = {"#a", "#b", "#c"};
  std::stringstream buf;
  m.save(buf);
  const auto back = ElasticNetModel::load(buf);
  CHECK(back.lambda1 == m.lambda1);
  CHECK(back.lambda2 == m.lambda2);
  CHECK(back.intercept == m.intercept);
  CHECK(back.weights == m.weights);
  CHECK(back.feature_means == m.feature_means);
  CHECK(back.feature_scales == m.feature_scales);
  CHECK(back.feature_names == m.feature_names);
  std::istringstream bad("0.1 0.2 3\nname 1 2\n");
  CHECK_THROWS_AS(ElasticNetModel::load(bad), ValidationError);
  std::istringstream empty("");
  CHECK_THROWS_AS(ElasticNetModel::load(empty), ValidationError);
}

TEST_CASE("region split sizes") {
  const auto s49 = split_regions(codes(49), 1);
  CHECK(s49.train.size() == 37);
  CHECK(s49.validation.size() == 4);
  CHECK(s49.test.size() == 8);
  const auto s13 = split_regions(codes(13), 1);
  CHECK(s13.train.size() == 1);
  CHECK(s13.validation.size() == 4);
  CHECK(s13.test.size() == 8);
  CHECK_THROWS_AS(split_regions(codes(12), 1), ValidationError);
  CHECK_THROWS_AS(split_regions({"R01", "R01", "R02", "R03", "R04", "R05", "R06", "R07", "R08", "R09", "R10", "R11",
                                 "R12", "R13"},
                                1),
                  ValidationError);
}

TEST_CASE("region split is a seeded partition") {
  const auto all = codes(30);
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto a = split_regions(all, seed);
    const auto b = split_regions(all, seed);
    CHECK(a.train == b.train);
    CHECK(a.validation == b.validation);
    CHECK(a.test == b.test);
    std::multiset<std::string> joined(a.train.begin(), a.train.end());
    joined.insert(a.validation.begin(), a.validation.end());
    joined.insert(a.test.begin(), a.test.end());
    CHECK(joined == std::multiset<std::string>(all.begin(), all.end()));
  }
  CHECK(split_regions(all, 1).test != split_regions(all, 2).test);
}

TEST_CASE("single-trial search returns that trial refit on train and validation") {
  const auto regions = codes(20);
  const auto inst = random_instance(8, 20, 3);
  const auto split = split_regions(regions, 4);
  const auto r = random_search(inst.x, inst.y, regions, split, 1, 11);
  REQUIRE(r.trials.size() == 1);
  CHECK(r.best.lambda1 == r.trials[0].lambda1);
  CHECK(r.best.lambda2 == r.trials[0].lambda2);
  std::vector<std::string> pool = split.train;
  pool.insert(pool.end(), split.validation.begin(), split.validation.end());
  const auto direct =
      fit(select_rows(inst.x, regions, pool), select_values(inst.y, regions, pool), r.best.lambda1, r.best.lambda2);
  CHECK(direct.weights == r.model.weights);
  CHECK(direct.intercept == r.model.intercept);
}

TEST_CASE("search draws lie in range and are seeded") {
  const auto regions = codes(20);
  const auto inst = random_instance(9, 20, 3);
  const auto split = split_regions(regions, 4);
  const auto a = random_search(inst.x, inst.y, regions, split, 40, 5);
  const auto b = random_search(inst.x, inst.y, regions, split, 40, 5, 5, 4);
  REQUIRE(a.trials.size() == 40);
  for (std::size_t t = 0; t < a.trials.size(); ++t) {
    CHECK(a.trials[t].lambda1 >= kLambdaMin);
    CHECK(a.trials[t].lambda1 <= kLambdaMax);
    CHECK(a.trials[t].lambda2 >= kLambdaMin);
    CHECK(a.trials[t].lambda2 <= kLambdaMax);
    CHECK(a.trials[t].validation_mae == b.trials[t].validation_mae);
    CHECK(a.trials[t].cv_mae == b.trials[t].cv_mae);
    CHECK(a.best.validation_mae <= a.trials[t].validation_mae);
  }
  CHECK(a.best.index == b.best.index);
  CHECK(a.model.weights == b.model.weights);
  std::size_t small = 0;
  for (const auto& t : a.trials) small += t.lambda1 < 1e-1;
  CHECK(small > 10);
}

TEST_CASE("constant targets give a flat model") {
  const auto regions = codes(20);
  auto inst = random_instance(10, 20, 3);
  std::fill(inst.y.begin(), inst.y.end(), 31.5);
  const auto r = random_search(inst.x, inst.y, regions, split_regions(regions, 2), 10, 3);
  for (double w : r.model.weights) CHECK(std::abs(w) < 1e-9);
  for (const auto& t : r.trials) CHECK(t.validation_mae < 1e-9);
}

TEST_CASE("search beats the intercept-only baseline on a planted signal") {
  const auto regions = codes(20);
  Rng rng(17);
  Matrix x(20, 6);
  Vector y(20);
  for (std::size_t i = 0; i < 20; ++i) {
    for (std::size_t j = 0; j < 6; ++j) x(i, j) = rng.uniform(0, 1);
    y[i] = 25 + 10 * x(i, 0) - 4 * x(i, 2) + rng.uniform(-0.2, 0.2);
  }
  const auto split = split_regions(regions, 7);
  const auto r = random_search(x, y, regions, split, 50, 7);
  const auto ytr = select_values(y, regions, split.train);
  const auto yva = select_values(y, regions, split.validation);
  const double base = mean_of(ytr);
  double baseline = 0;
  for (double v : yva) baseline += std::abs(v - base) / yva.size();
  CHECK(r.best.validation_mae < baseline);
}

TEST_CASE("search rejects bad arguments") {
  const auto regions = codes(20);
  const auto inst = random_instance(1, 20, 2);
  const auto split = split_regions(regions, 1);
  CHECK_THROWS_AS(random_search(inst.x, inst.y, regions, split, 0, 1), ValidationError);
  CHECK_THROWS_AS(random_search(inst.x, inst.y, regions, split, 1, 1, 1), ValidationError);
  const auto thin = split_regions(codes(13), 1);
  const auto inst13 = random_instance(1, 13, 2);
  CHECK_THROWS_WITH_AS(random_search(inst13.x, inst13.y, codes(13), thin, 1, 1), doctest::Contains("2 training"),
                       ValidationError);
  const std::vector<std::string> short_regions(regions.begin(), regions.begin() + 19);
  CHECK_THROWS_AS(random_search(inst.x, inst.y, short_regions, split, 1, 1), ValidationError);
}
