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

#include "tagsurv/corpus.hpp"

#include <algorithm>
#include <array>
#include <fstream>
#include <istream>
#include "json.hpp"
#include <ostream>
#include <sstream>

#include "tagsurv/error.hpp"
#include "tagsurv/numeric.hpp"

namespace tagsurv::corpus {

namespace detail {
extern const char* const kStopwordData;
}

namespace {

struct CodeRange {
  char32_t lo, hi;
};

// Emoji blocks, sorted by lower bound.
constexpr std::array<CodeRange, 22> kEmojiRanges{{
    {0x231A, 0x231B},   {0x23E9, 0x23F3},   {0x23F8, 0x23FA},   {0x24C2, 0x24C2},
    {0x25AA, 0x25AB},   {0x25B6, 0x25B6},   {0x25C0, 0x25C0},   {0x25FB, 0x25FE},
    {0x2600, 0x26FF},   {0x2700, 0x27BF},   {0x2934, 0x2935},   {0x2B05, 0x2B07},
    {0x2B1B, 0x2B1C},   {0x2B50, 0x2B50},   {0x2B55, 0x2B55},   {0x3030, 0x3030},
    {0x1F000, 0x1F0FF}, {0x1F170, 0x1F251}, {0x1F300, 0x1F64F}, {0x1F680, 0x1F6FF},
    {0x1F900, 0x1F9FF}, {0x1FA70, 0x1FAFF},
}};

// Decodes one UTF-8 sequence at s[i]; returns U+FFFD-like sentinel 0 for
// malformed input and advances by one byte in that case.
char32_t decode_utf8(std::string_view s, std::size_t& i) {
  const auto b0 = static_cast<unsigned char>(s[i]);
  auto cont = [&](std::size_t k) -> int {
    if (i + k >= s.size()) return -1;
    const auto b = static_cast<unsigned char>(s[i + k]);
    return (b & 0xC0) == 0x80 ? (b & 0x3F) : -1;
  };
  if (b0 < 0x80) {
    ++i;
    return b0;
  }
  int len = 0;
  char32_t cp = 0;
  if ((b0 & 0xE0) == 0xC0) {
    len = 2;
    cp = b0 & 0x1F;
  } else if ((b0 & 0xF0) == 0xE0) {
    len = 3;
    cp = b0 & 0x0F;
  } else if ((b0 & 0xF8) == 0xF0) {
    len = 4;
    cp = b0 & 0x07;
  } else {
    ++i;
    return 0;
  }
  for (int k = 1; k < len; ++k) {
    const int c = cont(static_cast<std::size_t>(k));
    if (c < 0) {
      ++i;
      return 0;
    }
    cp = (cp << 6) | static_cast<char32_t>(c);
  }
  i += static_cast<std::size_t>(len);
  return cp;
}

void append_utf8(std::string& out, char32_t cp) {
  if (cp < 0x80) {
    out += static_cast<char>(cp);
  } else if (cp < 0x800) {
    out += static_cast<char>(0xC0 | (cp >> 6));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  } else if (cp < 0x10000) {
    out += static_cast<char>(0xE0 | (cp >> 12));
    out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  } else {
    out += static_cast<char>(0xF0 | (cp >> 18));
    out += static_cast<char>(0x80 | ((cp >> 12) & 0x3F));
    out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  }
}

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v'; }

bool starts_with_url(std::string_view chunk) {
  return chunk.starts_with("http://") || chunk.starts_with("https://") || chunk.starts_with("www.");
}

// Splits one whitespace-free chunk into normalised tokens.
void split_chunk(std::string_view chunk, std::vector<std::string>& out) {
  std::string cur;
  bool hashtag = false;
  auto flush = [&] {
    if (!cur.empty() && cur != "#") out.push_back(cur);
    cur.clear();
    hashtag = false;
  };
  for (std::size_t i = 0; i < chunk.size();) {
    const char32_t cp = decode_utf8(chunk, i);
    if (cp >= 'A' && cp <= 'Z') {
      cur += static_cast<char>(cp - 'A' + 'a');
    } else if (cp >= 'a' && cp <= 'z') {
      cur += static_cast<char>(cp);
    } else if (cp >= '0' && cp <= '9') {
      if (hashtag) cur += static_cast<char>(cp);
    } else if (cp == '#') {
      flush();
      cur = "#";
      hashtag = true;
    } else if (cp == '\'' || cp == 0x2019) {
      // apostrophes join: "don't" -> "dont"
    } else if (is_emoji(cp)) {
      flush();
      std::string e;
      append_utf8(e, cp);
      out.push_back(std::move(e));
    } else {
      flush();
    }
  }
  flush();
}

bool ends_with(std::string_view s, std::string_view suffix) { return s.ends_with(suffix); }

std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && is_space(s[b])) ++b;
  while (e > b && is_space(s[e - 1])) --e;
  return std::string(s.substr(b, e - b));
}

}  // namespace

bool is_emoji(char32_t cp) {
  auto it = std::upper_bound(kEmojiRanges.begin(), kEmojiRanges.end(), cp,
                             [](char32_t v, const CodeRange& r) { return v < r.lo; });
  if (it == kEmojiRanges.begin()) return false;
  --it;
  return cp <= it->hi;
}

std::vector<std::string> normalize_text(std::string_view raw) {
  std::vector<std::string> tokens;
  std::size_t i = 0;
  std::string lowered;
  while (i < raw.size()) {
    while (i < raw.size() && is_space(raw[i])) ++i;
    std::size_t j = i;
    while (j < raw.size() && !is_space(raw[j])) ++j;
    if (j > i) {
      lowered.assign(raw.substr(i, j - i));
      for (auto& c : lowered)
        if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
      if (!starts_with_url(lowered) && lowered.front() != '@') split_chunk(lowered, tokens);
    }
    i = j;
  }

  std::vector<std::string> capped;
  capped.reserve(tokens.size());
  std::size_t run = 0;
  for (auto& t : tokens) {
    run = (!capped.empty() && capped.back() == t) ? run + 1 : 1;
    if (run <= kRepeatCap) capped.push_back(std::move(t));
  }
  return capped;
}

std::string join_tokens(std::span<const std::string> tokens) {
  std::string out;
  for (const auto& t : tokens) {
    if (!out.empty()) out += ' ';
    out += t;
  }
  return out;
}

std::string lemmatize(std::string_view token) {
  std::string t(token);
  if (t.size() <= 3 || ends_with(t, "ss") || !ends_with(t, "s")) return t;
  if (ends_with(t, "ies")) return t.substr(0, t.size() - 3) + "y";
  if (ends_with(t, "sses") || ends_with(t, "xes") || ends_with(t, "zes") || ends_with(t, "ches") ||
      ends_with(t, "shes"))
    return t.substr(0, t.size() - 2);
  return t.substr(0, t.size() - 1);
}

std::vector<std::string> extract_hashtags(std::span<const std::string> tokens) {
  std::vector<std::string> tags;
  for (const auto& t : tokens)
    if (t.size() > 1 && t.front() == '#' && std::find(tags.begin(), tags.end(), t) == tags.end())
      tags.push_back(t);
  return tags;
}

TweetRecord make_record(std::string id, std::string region, std::string text) {
  TweetRecord r{std::move(id), std::move(region), std::move(text), {}};
  r.hashtags = extract_hashtags(normalize_text(r.text));
  return r;
}

namespace {

StopwordSet parse_stopwords(std::istream& in) {
  StopwordSet set;
  std::string line;
  while (std::getline(in, line)) {
    auto w = trim(line);
    if (w.empty() || w.front() == '#') continue;
    set.insert(std::move(w));
  }
  return set;
}

}  // namespace

const StopwordSet& default_stopwords() {
  static const StopwordSet set = [] {
    std::istringstream in(detail::kStopwordData);
    return parse_stopwords(in);
  }();
  return set;
}

StopwordSet load_stopwords(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open stopword file '" + path + "'");
  return parse_stopwords(in);
}

void TokenCounter::add(std::span<const std::string> tokens) {
  ++records_;
  for (const auto& t : tokens) ++counts_[t];
}

void TokenCounter::add(const TweetRecord& record) {
  const auto tokens = normalize_text(record.text);
  add(tokens);
}

void TokenCounter::merge(const TokenCounter& other) {
  records_ += other.records_;
  for (const auto& [t, c] : other.counts_) counts_[t] += c;
}

Vocabulary::Vocabulary(std::vector<std::string> words, std::vector<std::uint64_t> word_counts,
                       std::uint64_t oov_count, std::vector<std::string> hashtags,
                       std::vector<std::uint64_t> hashtag_counts)
    : words_(std::move(words)),
      word_counts_(std::move(word_counts)),
      oov_count_(oov_count),
      hashtags_(std::move(hashtags)),
      hashtag_counts_(std::move(hashtag_counts)) {
  if (word_counts_.size() != words_.size() || hashtag_counts_.size() != hashtags_.size())
    throw ValidationError("vocabulary: count list length mismatch");
  for (std::size_t i = 0; i < words_.size(); ++i) {
    if (words_[i].empty() || words_[i].front() == '#' || words_[i] == kOovToken)
      throw ValidationError("vocabulary: invalid word '" + words_[i] + "'");
    if (!word_index_.emplace(words_[i], static_cast<std::int32_t>(i)).second)
      throw ValidationError("vocabulary: duplicate word '" + words_[i] + "'");
  }
  for (std::size_t i = 0; i < hashtags_.size(); ++i) {
    if (hashtags_[i].size() < 2 || hashtags_[i].front() != '#')
      throw ValidationError("vocabulary: pool entry '" + hashtags_[i] + "' is not a hashtag");
    if (!hashtag_index_.emplace(hashtags_[i], static_cast<std::uint32_t>(i)).second)
      throw ValidationError("vocabulary: duplicate hashtag '" + hashtags_[i] + "'");
  }
}

std::optional<std::int32_t> Vocabulary::word_id(std::string_view token) const {
  auto it = word_index_.find(std::string(token));
  if (it == word_index_.end()) return std::nullopt;
  return it->second;
}

std::int32_t Vocabulary::lookup(std::string_view token) const {
  return word_id(token).value_or(oov_id());
}

std::optional<std::uint32_t> Vocabulary::hashtag_id(std::string_view hashtag) const {
  auto it = hashtag_index_.find(std::string(hashtag));
  if (it == hashtag_index_.end()) return std::nullopt;
  return it->second;
}

void Vocabulary::save(std::ostream& out) const {
  out << "#vocab v1 words=" << words_.size() << " hashtags=" << hashtags_.size() << '\n';
  for (std::size_t i = 0; i < words_.size(); ++i)
    out << words_[i] << '\t' << i << '\t' << word_counts_[i] << '\n';
  out << kOovToken << '\t' << oov_id() << '\t' << oov_count_ << '\n';
  for (std::size_t p = 0; p < hashtags_.size(); ++p)
    out << hashtags_[p] << '\t' << tag_row_offset() + p << '\t' << hashtag_counts_[p] << '\n';
}

Vocabulary Vocabulary::load(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw ValidationError("vocab: missing header");
  std::size_t n_words = 0, n_tags = 0;
  {
    std::istringstream hdr(line);
    std::string magic, version, w, h;
    hdr >> magic >> version >> w >> h;
    if (magic != "#vocab" || version != "v1" || !w.starts_with("words=") || !h.starts_with("hashtags="))
      throw ValidationError("vocab: bad header '" + line + "'");
    try {
      n_words = std::stoull(w.substr(6));
      n_tags = std::stoull(h.substr(9));
    } catch (const std::exception&) {
      throw ValidationError("vocab: bad header '" + line + "'");
    }
  }
  std::vector<std::string> words, tags;
  std::vector<std::uint64_t> wc, tc;
  std::uint64_t oov = 0;
  const std::size_t total = n_words + 1 + n_tags;
  for (std::size_t row = 0; row < total; ++row) {
    if (!std::getline(in, line)) throw ValidationError("vocab: truncated at id " + std::to_string(row));
    const auto t1 = line.find('\t');
    const auto t2 = t1 == std::string::npos ? t1 : line.find('\t', t1 + 1);
    if (t2 == std::string::npos) throw ValidationError("vocab: line for id " + std::to_string(row) + " needs 3 fields");
    std::string token = line.substr(0, t1);
    std::uint64_t id = 0, count = 0;
    try {
      id = std::stoull(line.substr(t1 + 1, t2 - t1 - 1));
      count = std::stoull(line.substr(t2 + 1));
    } catch (const std::exception&) {
      throw ValidationError("vocab: non-numeric id/count for token '" + token + "'");
    }
    if (id != row) throw ValidationError("vocab: id " + std::to_string(id) + " out of order, expected " + std::to_string(row));
    if (row < n_words) {
      words.push_back(std::move(token));
      wc.push_back(count);
    } else if (row == n_words) {
      if (token != kOovToken) throw ValidationError("vocab: expected sentinel at id " + std::to_string(row));
      oov = count;
    } else {
      tags.push_back(std::move(token));
      tc.push_back(count);
    }
  }
  return Vocabulary(std::move(words), std::move(wc), oov, std::move(tags), std::move(tc));
}

Vocabulary build_vocabulary(const TokenCounter& counts, std::size_t max_words,
                            std::size_t max_hashtags, const StopwordSet& stopwords) {
  if (counts.records() == 0) throw ValidationError("empty corpus");
  if (max_words < 1 || max_hashtags < 1)
    throw ValidationError("max_words and max_hashtags must be at least 1");

  using Entry = std::pair<std::string, std::uint64_t>;
  std::vector<Entry> words, tags;
  for (const auto& [tok, c] : counts.counts()) {
    if (tok.front() == '#')
      tags.emplace_back(tok, c);
    else if (!stopwords.contains(tok))
      words.emplace_back(tok, c);
  }
  auto by_count = [](const Entry& a, const Entry& b) {
    return a.second != b.second ? a.second > b.second : a.first < b.first;
  };
  std::sort(words.begin(), words.end(), by_count);
  std::sort(tags.begin(), tags.end(), by_count);

  std::uint64_t oov = 0;
  for (std::size_t i = max_words; i < words.size(); ++i) oov += words[i].second;
  words.resize(std::min(words.size(), max_words));
  tags.resize(std::min(tags.size(), max_hashtags));

  std::vector<std::string> w, t;
  std::vector<std::uint64_t> wc, tc;
  for (auto& [tok, c] : words) {
    w.push_back(std::move(tok));
    wc.push_back(c);
  }
  for (auto& [tok, c] : tags) {
    t.push_back(std::move(tok));
    tc.push_back(c);
  }
  return Vocabulary(std::move(w), std::move(wc), oov, std::move(t), std::move(tc));
}

Vocabulary build_vocabulary(std::span<const TweetRecord> corpus, std::size_t max_words,
                            std::size_t max_hashtags, const StopwordSet& stopwords) {
  TokenCounter counter;
  for (const auto& r : corpus) counter.add(r);
  return build_vocabulary(counter, max_words, max_hashtags, stopwords);
}

std::vector<std::int32_t> encode_tokens(std::span<const std::string> tokens,
                                        const Vocabulary& vocab, std::size_t max_len) {
  if (max_len < 1) throw ValidationError("max length must be at least 1");
  std::vector<std::int32_t> ids(max_len, numeric::kPadId);
  const std::size_t n = std::min(tokens.size(), max_len);
  for (std::size_t i = 0; i < n; ++i) {
    std::string_view t = tokens[i];
    if (!t.empty() && t.front() == '#') t.remove_prefix(1);
    ids[i] = vocab.lookup(t);
  }
  return ids;
}

std::vector<std::int32_t> encode_tweet(const TweetRecord& record, const Vocabulary& vocab,
                                       std::size_t max_len) {
  const auto tokens = normalize_text(record.text);
  return encode_tokens(tokens, vocab, max_len);
}

std::vector<std::uint32_t> pooled_hashtags(const TweetRecord& record, const Vocabulary& vocab) {
  std::vector<std::uint32_t> ids;
  for (const auto& h : record.hashtags)
    if (auto id = vocab.hashtag_id(h); id && std::find(ids.begin(), ids.end(), *id) == ids.end())
      ids.push_back(*id);
  return ids;
}

KeywordList::KeywordList(std::vector<Keyword> entries) {
  for (auto& e : entries) {
    if (e.term.empty() || std::any_of(e.term.begin(), e.term.end(), [](char c) { return is_space(c); }))
      throw ValidationError("keyword '" + e.term + "' is empty or contains whitespace");
    if (index_.contains(e.term)) continue;
    index_.emplace(e.term, entries_.size());
    entries_.push_back(std::move(e));
  }
}

bool KeywordList::contains(std::string_view lemma) const { return index_.contains(std::string(lemma)); }

std::optional<std::size_t> KeywordList::index_of(std::string_view lemma) const {
  auto it = index_.find(std::string(lemma));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

KeywordList parse_keywords(std::istream& in) {
  std::vector<Keyword> entries;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty() || line.front() == '#') continue;
    std::string term = line, source;
    if (auto tab = line.find('\t'); tab != std::string::npos) {
      term = line.substr(0, tab);
      auto suffix = trim(std::string_view(line).substr(tab + 1));
      if (!suffix.starts_with("source="))
        throw ValidationError("keyword file line " + std::to_string(lineno) + ": expected source=<tag>");
      source = suffix.substr(7);
    }
    term = trim(term);
    if (std::any_of(term.begin(), term.end(), [](char c) { return is_space(c); }))
      throw ValidationError("keyword file line " + std::to_string(lineno) + ": term '" + term +
                            "' contains whitespace");
    const auto tokens = normalize_text(term);
    if (tokens.size() != 1 || tokens.front().front() == '#')
      throw ValidationError("keyword file line " + std::to_string(lineno) + ": term '" + term +
                            "' is not a single plain word");
    entries.push_back({lemmatize(tokens.front()), std::move(source)});
  }
  return KeywordList(std::move(entries));
}

void write_keywords(std::ostream& out, const KeywordList& keywords) {
  out << "# food keywords, one lemmatised term per line\n";
  for (const auto& k : keywords.entries()) {
    out << k.term;
    if (!k.source.empty()) out << "\tsource=" << k.source;
    out << '\n';
  }
}

std::vector<TweetRecord> read_tweets(std::istream& in) {
  std::vector<TweetRecord> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error&) {
      throw ValidationError("tweets line " + std::to_string(lineno) + ": invalid JSON");
    }
    if (!j.is_object()) throw ValidationError("tweets line " + std::to_string(lineno) + ": not an object");
    auto field = [&](const char* name) {
      auto it = j.find(name);
      if (it == j.end() || !it->is_string())
        throw ValidationError("tweets line " + std::to_string(lineno) + ": missing string field '" +
                              name + "'");
      return it->get<std::string>();
    };
    out.push_back(make_record(field("id"), field("region"), field("text")));
  }
  return out;
}

void write_tweets(std::ostream& out, std::span<const TweetRecord> tweets, bool with_hashtags) {
  for (const auto& t : tweets) {
    nlohmann::json j{{"id", t.id}, {"region", t.region}, {"text", t.text}};
    if (with_hashtags) j["hashtags"] = t.hashtags;
    out << j.dump() << '\n';
  }
}

}  // namespace tagsurv::corpus
