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

#include "tagsurv/features.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>

#include "tagsurv/error.hpp"

namespace tagsurv::features {

namespace {

std::string fmt(double v) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> cells;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

double parse_number(const std::string& s, const std::string& where) {
  double v = 0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size() || !std::isfinite(v))
    throw ValidationError(where + ": invalid number '" + s + "'");
  return v;
}

}  // namespace

std::string to_string(Scoring s) { return s == Scoring::inner ? "inner" : "cosine"; }

Scoring parse_scoring(const std::string& s) {
  if (s == "inner") return Scoring::inner;
  if (s == "cosine") return Scoring::cosine;
  throw ValidationError("scoring must be 'inner' or 'cosine', got '" + s + "'");
}

std::vector<std::string> lemma_tokens(const corpus::TweetRecord& record) {
  std::vector<std::string> out;
  for (const auto& t : corpus::normalize_text(record.text)) {
    std::string_view v = t;
    if (v.front() == '#') v.remove_prefix(1);
    if (v.empty() || static_cast<unsigned char>(v.front()) >= 0x80) continue;
    out.push_back(corpus::lemmatize(v));
  }
  return out;
}

bool keyword_match(const corpus::TweetRecord& record, const corpus::KeywordList& keywords) {
  const auto lemmas = lemma_tokens(record);
  return std::any_of(lemmas.begin(), lemmas.end(), [&](const std::string& l) { return keywords.contains(l); });
}

std::map<std::string, std::optional<double>> food_rate(
    std::span<const corpus::TweetRecord> tweets, std::span<const std::string> regions,
    const std::function<bool(const corpus::TweetRecord&)>& matcher) {
  std::map<std::string, std::pair<std::size_t, std::size_t>> counts;
  for (const auto& r : regions) counts[r];
  for (const auto& t : tweets) {
    if (t.region.empty()) throw ValidationError("tweet '" + t.id + "' has no region");
    auto& [matched, total] = counts[t.region];
    ++total;
    if (matcher(t)) ++matched;
  }
  std::map<std::string, std::optional<double>> rates;
  for (const auto& [region, c] : counts)
    rates[region] = c.second == 0 ? std::nullopt
                                  : std::optional<double>(static_cast<double>(c.first) / static_cast<double>(c.second));
  return rates;
}

KeywordTags keyword_tags(const corpus::KeywordList& keywords, const corpus::Vocabulary& vocab) {
  std::vector<std::vector<std::uint32_t>> per_keyword(keywords.size());
  for (std::uint32_t p = 0; p < vocab.pool_size(); ++p) {
    const auto lemma = corpus::lemmatize(std::string_view(vocab.hashtag(p)).substr(1));
    if (auto k = keywords.index_of(lemma)) per_keyword[*k].push_back(p);
  }
  KeywordTags out;
  for (std::size_t k = 0; k < keywords.size(); ++k) {
    if (per_keyword[k].empty()) out.dropped.push_back(keywords.entries()[k].term);
    for (auto p : per_keyword[k]) {
      out.tag_ids.push_back(p);
      out.names.push_back(vocab.hashtag(p));
    }
  }
  return out;
}

Vector region_embedding(std::span<const Vector> embeddings) {
  if (embeddings.empty()) throw ValidationError("empty region aggregate");
  std::vector<const Vector*> order;
  for (const auto& e : embeddings) order.push_back(&e);
  std::sort(order.begin(), order.end(), [](const Vector* a, const Vector* b) { return *a < *b; });
  Vector mean(embeddings.front().size(), 0.0);
  for (const auto* e : order) {
    if (e->size() != mean.size()) throw ValidationError("shape error: embeddings of unequal length");
    for (std::size_t i = 0; i < mean.size(); ++i) mean[i] += (*e)[i];
  }
  for (auto& v : mean) v /= static_cast<Real>(embeddings.size());
  return mean;
}

Vector extract_features(std::span<const Real> region_emb, std::span<const std::uint32_t> keyword_tag_ids,
                        const tagspace::EncoderParams& params, Scoring scoring) {
  Vector x;
  x.reserve(keyword_tag_ids.size());
  const Real region_norm = numeric::norm(region_emb);
  for (auto tag : keyword_tag_ids) {
    const auto row = params.tag_row(tag);
    if (row.size() != region_emb.size()) throw ValidationError("shape error: region embedding width");
    const Real d = numeric::dot(region_emb, row);
    if (scoring == Scoring::inner) {
      x.push_back(d);
    } else {
      const Real denom = region_norm * numeric::norm(row);
      x.push_back(denom == 0 ? 0.0 : d / denom);
    }
  }
  return x;
}

Vector bow_features(std::span<const corpus::TweetRecord> region_tweets, const corpus::KeywordList& keywords) {
  if (region_tweets.empty()) throw ValidationError("bag-of-words features need a non-empty region");
  Vector x(keywords.size(), 0.0);
  for (const auto& t : region_tweets)
    for (const auto& l : lemma_tokens(t))
      if (auto k = keywords.index_of(l)) x[*k] += 1.0;
  for (auto& v : x) v /= static_cast<Real>(region_tweets.size());
  return x;
}

std::string feature_column(std::size_t index) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "f_%04zu", index + 1);
  return buf;
}

void write_features(std::ostream& out, const std::vector<RegionFeatures>& rows) {
  const std::size_t width = rows.empty() ? 0 : rows.front().x.size();
  out << "region";
  for (std::size_t j = 0; j < width; ++j) out << ',' << feature_column(j);
  out << '\n';
  for (const auto& r : rows) {
    if (r.x.size() != width) throw ValidationError("features: region '" + r.region + "' has a different width");
    out << r.region;
    for (double v : r.x) out << ',' << fmt(v);
    out << '\n';
  }
}

std::vector<RegionFeatures> read_features(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw ValidationError("features: missing header");
  const auto header = split_csv(line);
  if (header.empty() || header[0] != "region") throw ValidationError("features: header must start with 'region'");
  for (std::size_t j = 1; j < header.size(); ++j)
    if (header[j] != feature_column(j - 1))
      throw ValidationError("features: column " + std::to_string(j + 1) + " should be '" + feature_column(j - 1) + "'");
  std::vector<RegionFeatures> rows;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto cells = split_csv(line);
    const std::string where = "features line " + std::to_string(lineno);
    if (cells.size() != header.size()) throw ValidationError(where + ": expected " + std::to_string(header.size()) + " fields");
    RegionFeatures r;
    r.region = cells[0];
    for (std::size_t j = 1; j < cells.size(); ++j) r.x.push_back(parse_number(cells[j], where));
    rows.push_back(std::move(r));
  }
  return rows;
}

void write_targets(std::ostream& out, const std::vector<std::pair<std::string, double>>& targets) {
  out << "region,target\n";
  for (const auto& [r, y] : targets) out << r << ',' << fmt(y) << '\n';
}

std::vector<std::pair<std::string, double>> read_targets(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || !line.starts_with("region,target"))
    throw ValidationError("targets: expected header 'region,target'");
  std::vector<std::pair<std::string, double>> out;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto cells = split_csv(line);
    const std::string where = "targets line " + std::to_string(lineno);
    if (cells.size() < 2) throw ValidationError(where + ": expected region,target");
    out.emplace_back(cells[0], parse_number(cells[1], where));
  }
  return out;
}

}  // namespace tagsurv::features
