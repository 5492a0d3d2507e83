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

// Region-level features: keyword matching, food-tweet rates, averaged
// tweet embeddings scored against keyword hashtag embeddings, and the
// keyword-frequency (bag-of-words) baseline.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "tagsurv/corpus.hpp"
#include "tagsurv/numeric.hpp"
#include "tagsurv/tagspace.hpp"

namespace tagsurv::features {

using numeric::Real;
using numeric::Vector;

enum class Scoring { inner, cosine };
std::string to_string(Scoring s);
Scoring parse_scoring(const std::string& s);

// Lemmatised tweet tokens (hashtags stripped of '#', emoji dropped).
std::vector<std::string> lemma_tokens(const corpus::TweetRecord& record);

bool keyword_match(const corpus::TweetRecord& record, const corpus::KeywordList& keywords);

// matched / total per region. Regions listed in `regions` but without any
// tweet map to nullopt.
std::map<std::string, std::optional<double>> food_rate(
    std::span<const corpus::TweetRecord> tweets, std::span<const std::string> regions,
    const std::function<bool(const corpus::TweetRecord&)>& matcher);

// Pool hashtags whose lemmatised plain form is a keyword, in keyword order.
struct KeywordTags {
  std::vector<std::uint32_t> tag_ids;
  std::vector<std::string> names;     // the hashtags, e.g. "#pizza"
  std::vector<std::string> dropped;   // keywords with no pool hashtag
};
KeywordTags keyword_tags(const corpus::KeywordList& keywords, const corpus::Vocabulary& vocab);

// Arithmetic mean. The sum runs in lexicographic order of the vectors so
// the result does not depend on input order.
Vector region_embedding(std::span<const Vector> embeddings);

Vector extract_features(std::span<const Real> region_emb, std::span<const std::uint32_t> keyword_tag_ids,
                        const tagspace::EncoderParams& params, Scoring scoring);

// Keyword mention counts divided by the region's tweet count; a tweet
// mentioning a keyword twice counts twice.
Vector bow_features(std::span<const corpus::TweetRecord> region_tweets, const corpus::KeywordList& keywords);

struct RegionFeatures {
  std::string region;
  Vector x;
  std::size_t n_food = 0;
  std::size_t n_total = 0;
};

// CSV "region,f_0001,...". Writing requires equal widths across rows.
void write_features(std::ostream& out, const std::vector<RegionFeatures>& rows);
std::vector<RegionFeatures> read_features(std::istream& in);
std::string feature_column(std::size_t index);

// CSV "region,target".
void write_targets(std::ostream& out, const std::vector<std::pair<std::string, double>>& targets);
std::vector<std::pair<std::string, double>> read_targets(std::istream& in);

}  // namespace tagsurv::features
