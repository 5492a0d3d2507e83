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

// Deterministic synthetic tweet corpus with planted structure: per-region
// food-tweet rates, a per-region food-item mixture, and a scalar target
// that is a monotone function of the mixture.

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "tagsurv/corpus.hpp"

namespace tagsurv::synth {

struct TopicTag {
  std::string hashtag;             // with '#'
  std::vector<std::string> words;  // words specific to this tag
};

struct Topic {
  std::string name;
  bool food = false;
  std::vector<std::string> shared_words;
  std::vector<TopicTag> tags;
};

struct GeneratorConfig {
  std::size_t regions = 20;
  std::size_t tweets_per_region = 500;
  // Food-tweet share interpolates between these over the latent region
  // score. Ignored when region_rates is non-empty.
  double rate_min = 0.030;
  double rate_max = 0.062;
  std::vector<double> region_rates;
  // Share of tweets carrying a keyword only through an idiom ("a hard nut
  // to crack"); these are keyword-matching false positives.
  double idiom_rate = 0.002;
  double hashtag_prob_food = 1.0;
  double hashtag_prob_other = 0.475;
  // Share of food tweets about the driver item, and the per-token
  // probability of drawing from food vocabulary, both rising with the
  // latent score.
  double driver_share_min = 0.10;
  double driver_share_max = 0.70;
  double intensity_min = 0.45;
  double intensity_max = 0.85;
  // target = target_base + target_slope * driver_share
  double target_base = 22.0;
  double target_slope = 20.0;
  std::size_t min_tokens = 6;
  std::size_t max_tokens = 14;
  std::vector<Topic> topics;  // exactly one food topic
  std::string driver_hashtag = "#macncheese";
  std::vector<std::string> filler_words;
  std::vector<std::string> idioms;
  std::vector<corpus::Keyword> extra_keywords;  // keywords with no hashtag

  // The bundled topic set: one food topic with six items and seven other
  // topics with two hashtags each (20 hashtags total).
  static GeneratorConfig defaults();
  void validate() const;
};

struct RegionTruth {
  std::string region;
  double target = 0;
  double food_rate = 0;  // realised share of food-topic tweets
  double driver_share = 0;
  double latent = 0;
};

struct SyntheticCorpus {
  std::vector<corpus::TweetRecord> tweets;
  std::vector<RegionTruth> truth;
  corpus::KeywordList keywords;
};

std::string region_code(std::size_t index);

SyntheticCorpus generate_synthetic_corpus(const GeneratorConfig& config, std::uint64_t seed);

// CSV "region,target,food_rate".
void write_ground_truth(std::ostream& out, const std::vector<RegionTruth>& truth);
std::vector<RegionTruth> read_ground_truth(std::istream& in);

}  // namespace tagsurv::synth
