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
#include <map>
#include <sstream>

#include "doctest.h"
#include "oracle.hpp"
#include "synthetic_run.hpp"
#include "tagsurv/error.hpp"
#include "tagsurv/features.hpp"
#include "tagsurv/random.hpp"

using namespace tagsurv;
using namespace tagsurv::features;
using corpus::make_record;
using corpus::TweetRecord;

namespace {

corpus::KeywordList kw(std::initializer_list<const char*> terms) {
  std::vector<corpus::Keyword> k;
  for (auto t : terms) k.push_back({t, "database"});
  return corpus::KeywordList(std::move(k));
}

tagspace::EncoderParams params_with_tags(const std::vector<Vector>& rows) {
  tagspace::Hyper h;
  h.dim = rows.front().size();
  h.window = 1;
  h.hidden = 2;
  auto p = tagspace::EncoderParams::init(h, 1 + rows.size(), 1, rows.size(), 1);
  for (std::size_t i = 0; i < rows.size(); ++i) std::copy(rows[i].begin(), rows[i].end(), p.word_table.row(1 + i).begin());
  return p;
}

}  // namespace

TEST_CASE("keyword_match examples") {
  const auto food = kw({"pizza", "nut", "cream", "berry"});
  CHECK(keyword_match(make_record("1", "R01", "i love pizzas"), food));
  CHECK(keyword_match(make_record("2", "R01", "that problem is a hard nut to crack"), food));
  CHECK_FALSE(keyword_match(make_record("3", "R01", "good morning"), food));
  CHECK(keyword_match(make_record("4", "R01", "#Berries for breakfast"), food));
  CHECK_FALSE(keyword_match(make_record("5", "R01", "pizzeria"), food));
}

TEST_CASE("food_rate examples") {
  std::vector<TweetRecord> tweets;
  for (int i = 0; i < 100; ++i) tweets.push_back(make_record(std::to_string(i), "R01", i < 3 ? "pizza time" : "hello"));
  for (int i = 0; i < 10; ++i) tweets.push_back(make_record("b" + std::to_string(i), "R02", "hello"));
  const std::vector<std::string> regions{"R01", "R02", "R03"};
  const auto food = kw({"pizza"});
  const auto rates = food_rate(tweets, regions, [&](const TweetRecord& r) { return keyword_match(r, food); });
  CHECK(*rates.at("R01") == doctest::Approx(0.03).epsilon(1e-15));
  CHECK(*rates.at("R02") == 0.0);
  CHECK_FALSE(rates.at("R03").has_value());

  tweets.push_back(make_record("x", "", "pizza"));
  CHECK_THROWS_AS(food_rate(tweets, regions, [](const TweetRecord&) { return true; }), ValidationError);
}

TEST_CASE("keyword food rate on the synthetic corpus") {
  const auto c = synth::generate_synthetic_corpus(synth::GeneratorConfig::defaults(), 7);
  std::vector<std::string> regions;
  for (const auto& t : c.truth) regions.push_back(t.region);
  const auto rates = food_rate(c.tweets, regions, [&](const TweetRecord& r) { return keyword_match(r, c.keywords); });
  double sum = 0;
  for (const auto& [region, rate] : rates) {
    REQUIRE(rate.has_value());
    CHECK(*rate >= 0.025);
    CHECK(*rate <= 0.067);
    sum += *rate;
  }
  CHECK(std::fabs(sum / static_cast<double>(rates.size()) - 0.047) <= 0.005);
}

TEST_CASE("region_embedding examples and order invariance") {
  const std::vector<Vector> two{{1, 0}, {0, 1}};
  CHECK(region_embedding(two) == Vector{0.5, 0.5});
  CHECK(region_embedding(std::vector<Vector>{{0.3, -2}}) == Vector{0.3, -2});
  const std::vector<Vector> copies(7, Vector{0.1, 0.7, -0.3});
  const auto m = region_embedding(copies);
  for (std::size_t i = 0; i < 3; ++i) CHECK(m[i] == doctest::Approx(copies[0][i]).epsilon(1e-15));
  CHECK_THROWS_WITH_AS(region_embedding(std::vector<Vector>{}), doctest::Contains("empty region aggregate"),
                       ValidationError);

  Rng rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<Vector> e(1 + rng.uniform_index(20), Vector(4));
    for (auto& v : e)
      for (auto& x : v) x = rng.uniform(-1, 1);
    const auto base = region_embedding(e);
    rng.shuffle(e.begin(), e.end());
    CHECK(region_embedding(e) == base);
  }
}

TEST_CASE("extract_features examples") {
  const auto p = params_with_tags({{1, 0}, {0, 0}});
  const std::vector<std::uint32_t> tags{0, 1};
  const auto inner = extract_features(Vector{0.5, 0.5}, tags, p, Scoring::inner);
  CHECK(inner[0] == 0.5);
  const auto cos = extract_features(Vector{0.5, 0.5}, tags, p, Scoring::cosine);
  CHECK(std::fabs(cos[0] - 0.70710678) < 1e-8);
  CHECK(cos[1] == 0.0);
  CHECK(extract_features(Vector{0, 0}, tags, p, Scoring::cosine) == Vector{0, 0});
  CHECK(parse_scoring("cosine") == Scoring::cosine);
  CHECK_THROWS_AS(parse_scoring("l2"), ValidationError);
}

TEST_CASE("inner-product features are linear in the region embedding") {
  Rng rng(9);
  std::vector<Vector> rows(5, Vector(4));
  for (auto& r : rows)
    for (auto& v : r) v = rng.uniform(-1, 1);
  const auto p = params_with_tags(rows);
  const std::vector<std::uint32_t> tags{4, 0, 2};
  for (int trial = 0; trial < 100; ++trial) {
    Vector a(4), b(4), ab(4);
    const double s = rng.uniform(-3, 3), t = rng.uniform(-3, 3);
    for (std::size_t i = 0; i < 4; ++i) {
      a[i] = rng.uniform(-1, 1);
      b[i] = rng.uniform(-1, 1);
      ab[i] = s * a[i] + t * b[i];
    }
    const auto fa = extract_features(a, tags, p, Scoring::inner), fb = extract_features(b, tags, p, Scoring::inner),
               fab = extract_features(ab, tags, p, Scoring::inner);
    for (std::size_t j = 0; j < tags.size(); ++j) CHECK(std::fabs(fab[j] - (s * fa[j] + t * fb[j])) < 1e-12);
  }
}

TEST_CASE("bow_features examples") {
  const auto food = kw({"pizza", "kale"});
  std::vector<TweetRecord> region;
  for (int i = 0; i < 100; ++i) region.push_back(make_record(std::to_string(i), "R01", i < 2 ? "pizza" : "hello"));
  CHECK(bow_features(region, food) == Vector{0.02, 0.0});
  const std::vector<TweetRecord> none{make_record("1", "R01", "hello there")};
  CHECK(bow_features(none, food) == Vector{0, 0});
  const std::vector<TweetRecord> twice{make_record("1", "R01", "pizza and #pizzas")};
  CHECK(bow_features(twice, food) == Vector{2, 0});
  CHECK_THROWS_AS(bow_features(std::vector<TweetRecord>{}, food), ValidationError);
}

TEST_CASE("bow vector is nonzero iff some tweet matches") {
  const auto c = synth::generate_synthetic_corpus(synth::GeneratorConfig::defaults(), 3);
  Rng rng(4);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<TweetRecord> pick;
    const auto n = 1 + rng.uniform_index(15);
    for (std::size_t i = 0; i < n; ++i) pick.push_back(c.tweets[rng.uniform_index(c.tweets.size())]);
    const auto x = bow_features(pick, c.keywords);
    const bool nonzero = std::any_of(x.begin(), x.end(), [](double v) { return v != 0; });
    const bool matched = std::any_of(pick.begin(), pick.end(), [&](const TweetRecord& t) { return keyword_match(t, c.keywords); });
    CHECK(nonzero == matched);
  }
}

TEST_CASE("keyword_tags keeps pooled keywords in keyword order") {
  corpus::TokenCounter counts;
  const std::vector<std::string> toks{"#pizza", "#pizzas", "#nyc", "#berries", "word"};
  counts.add(toks);
  const auto vocab = corpus::build_vocabulary(counts, 10, 10, {});
  const auto k = keyword_tags(kw({"berry", "yogurt", "pizza"}), vocab);
  CHECK(k.names == std::vector<std::string>{"#berries", "#pizza", "#pizzas"});
  CHECK(k.dropped == std::vector<std::string>{"yogurt"});
  for (std::size_t i = 0; i < k.names.size(); ++i) CHECK(vocab.hashtag(k.tag_ids[i]) == k.names[i]);
}

TEST_CASE("features and targets files round trip") {
  std::vector<RegionFeatures> rows{{"R01", {0.1, -2.5e-7}, 3, 10}, {"R02", {1.0 / 3.0, 4}, 1, 5}};
  std::stringstream ss;
  write_features(ss, rows);
  CHECK(ss.str().rfind("region,f_0001,f_0002\n", 0) == 0);
  const auto back = read_features(ss);
  REQUIRE(back.size() == 2);
  CHECK(back[1].x == rows[1].x);
  CHECK(feature_column(372) == "f_0373");

  std::stringstream bad("region,f_0002\nR01,1\n");
  CHECK_THROWS_AS(read_features(bad), ValidationError);
  std::stringstream nan("region,f_0001\nR01,nan\n");
  CHECK_THROWS_AS(read_features(nan), ValidationError);
  std::stringstream ragged("region,f_0001\nR01,1,2\n");
  CHECK_THROWS_AS(read_features(ragged), ValidationError);

  std::stringstream t;
  write_targets(t, {{"R01", 30.5}, {"R02", 22}});
  CHECK(read_targets(t) == std::vector<std::pair<std::string, double>>{{"R01", 30.5}, {"R02", 22}});
  std::stringstream gt("region,target,food_rate\nR01,3,0.04\n");
  CHECK(read_targets(gt).front().second == 3);
}

TEST_CASE("bow feature mass tracks planted food intensity on the synthetic corpus") {
  for (std::uint64_t seed : {7, 8, 9}) {
    const auto run = fixture::synthetic_run(seed);
    std::map<std::string, std::vector<TweetRecord>> by_region;
    for (const auto& t : run.tweets) by_region[t.region].push_back(t);
    std::vector<double> mass, intensity;
    for (const auto& truth : run.raw.truth) {
      const auto x = bow_features(by_region[truth.region], run.raw.keywords);
      double s = 0;
      for (double v : x) s += v;
      mass.push_back(s);
      intensity.push_back(truth.latent);
    }
    CHECK(oracle::spearman(mass, intensity) > 0.9);
  }
}
