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

// Text normalisation, lemmatisation, vocabulary construction and the
// corpus / vocabulary / keyword file formats.

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

namespace tagsurv::corpus {

inline constexpr std::string_view kOovToken = "<UNKNOWN>";

struct TweetRecord {
  std::string id;
  std::string region;
  std::string text;
  std::vector<std::string> hashtags;  // normalised, '#' kept, first-seen order

  bool operator==(const TweetRecord&) const = default;
};

// Lowercases, drops URLs / @-mentions / special characters, drops digits
// outside hashtags, splits emoji into their own tokens and caps runs of an
// identical token at kRepeatCap.
inline constexpr std::size_t kRepeatCap = 3;
std::vector<std::string> normalize_text(std::string_view raw);

std::string join_tokens(std::span<const std::string> tokens);

// True for code points in the emoji table.
bool is_emoji(char32_t cp);

// Rule-based singularisation; idempotent.
std::string lemmatize(std::string_view token);

// Hashtag tokens of an already normalised token sequence, deduplicated.
std::vector<std::string> extract_hashtags(std::span<const std::string> tokens);

// Builds a record whose hashtag list is derived from `text`.
TweetRecord make_record(std::string id, std::string region, std::string text);

using StopwordSet = std::unordered_set<std::string>;

// The bundled English stopword list.
const StopwordSet& default_stopwords();
StopwordSet load_stopwords(const std::string& path);

// Mergeable token counts. Counting is per record, so shards can be counted
// independently and merged in a fixed order.
class TokenCounter {
 public:
  void add(std::span<const std::string> tokens);
  void add(const TweetRecord& record);
  void merge(const TokenCounter& other);

  std::size_t records() const { return records_; }
  const std::unordered_map<std::string, std::uint64_t>& counts() const { return counts_; }

 private:
  std::size_t records_ = 0;
  std::unordered_map<std::string, std::uint64_t> counts_;
};

// Ids: words are 0..W-1, the OOV sentinel is W, and hashtag pool entry p
// lives at embedding row W + 1 + p. Hashtags are never word ids.
class Vocabulary {
 public:
  Vocabulary() = default;
  Vocabulary(std::vector<std::string> words, std::vector<std::uint64_t> word_counts,
             std::uint64_t oov_count, std::vector<std::string> hashtags,
             std::vector<std::uint64_t> hashtag_counts);

  std::size_t num_words() const { return words_.size(); }
  std::int32_t oov_id() const { return static_cast<std::int32_t>(words_.size()); }
  // Size of the word index including the sentinel.
  std::size_t index_size() const { return words_.size() + 1; }
  std::size_t pool_size() const { return hashtags_.size(); }
  // Rows needed in the embedding table.
  std::size_t table_rows() const { return index_size() + pool_size(); }
  std::size_t tag_row_offset() const { return index_size(); }

  std::optional<std::int32_t> word_id(std::string_view token) const;
  // Word id or the OOV sentinel.
  std::int32_t lookup(std::string_view token) const;
  std::optional<std::uint32_t> hashtag_id(std::string_view hashtag) const;

  const std::string& word(std::size_t id) const { return words_[id]; }
  const std::string& hashtag(std::size_t id) const { return hashtags_[id]; }
  const std::vector<std::string>& words() const { return words_; }
  const std::vector<std::string>& hashtag_pool() const { return hashtags_; }
  std::uint64_t word_count(std::size_t id) const { return word_counts_[id]; }
  std::uint64_t hashtag_count(std::size_t id) const { return hashtag_counts_[id]; }
  std::uint64_t oov_count() const { return oov_count_; }

  // TSV: "#vocab v1 words=<n> hashtags=<m>" then token<TAB>id<TAB>count,
  // words first, then the sentinel, then the pool (id = embedding row).
  void save(std::ostream& out) const;
  static Vocabulary load(std::istream& in);

 private:
  std::vector<std::string> words_;
  std::vector<std::uint64_t> word_counts_;
  std::uint64_t oov_count_ = 0;
  std::vector<std::string> hashtags_;
  std::vector<std::uint64_t> hashtag_counts_;
  std::unordered_map<std::string, std::int32_t> word_index_;
  std::unordered_map<std::string, std::uint32_t> hashtag_index_;
};

// Top max_words non-hashtag, non-stopword tokens and top max_hashtags
// hashtags by count; ties break lexicographically ascending.
Vocabulary build_vocabulary(const TokenCounter& counts, std::size_t max_words,
                            std::size_t max_hashtags, const StopwordSet& stopwords);
Vocabulary build_vocabulary(std::span<const TweetRecord> corpus, std::size_t max_words,
                            std::size_t max_hashtags, const StopwordSet& stopwords);

// Fixed-length id sequence. Hashtags are replaced by the id of their plain
// word; the tail is filled with numeric::kPadId.
std::vector<std::int32_t> encode_tokens(std::span<const std::string> tokens,
                                        const Vocabulary& vocab, std::size_t max_len);
std::vector<std::int32_t> encode_tweet(const TweetRecord& record, const Vocabulary& vocab,
                                       std::size_t max_len);

// Pool ids of the record's hashtags, in first-seen order.
std::vector<std::uint32_t> pooled_hashtags(const TweetRecord& record, const Vocabulary& vocab);

struct Keyword {
  std::string term;    // lemmatised, lowercase, no whitespace
  std::string source;  // "database", "press" or empty
};

class KeywordList {
 public:
  KeywordList() = default;
  explicit KeywordList(std::vector<Keyword> entries);

  const std::vector<Keyword>& entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }
  bool contains(std::string_view lemma) const;
  // Position of a lemma in entries(), if present.
  std::optional<std::size_t> index_of(std::string_view lemma) const;

 private:
  std::vector<Keyword> entries_;
  std::unordered_map<std::string, std::size_t> index_;
};

// One term per line, '#' comment lines, optional "\tsource=<tag>" suffix.
// Terms are lemmatised; duplicates after lemmatisation are dropped.
KeywordList parse_keywords(std::istream& in);
void write_keywords(std::ostream& out, const KeywordList& keywords);

// JSON lines with id / region / text, plus an optional hashtags array.
std::vector<TweetRecord> read_tweets(std::istream& in);
void write_tweets(std::ostream& out, std::span<const TweetRecord> tweets, bool with_hashtags);

}  // namespace tagsurv::corpus
