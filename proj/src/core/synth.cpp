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

#include "tagsurv/synth.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <istream>
#include <iterator>
#include <numeric>
#include <ostream>
#include <sstream>

#include "tagsurv/error.hpp"
#include "tagsurv/random.hpp"

namespace tagsurv::synth {

namespace {

const std::vector<std::string> kEmoji = {"\xF0\x9F\x98\x82", "\xF0\x9F\x94\xA5", "\xF0\x9F\x99\x8C",
                                         "\xF0\x9F\x98\x8D"};
const std::vector<std::string> kFoodEmoji = {"\xF0\x9F\x8D\x95", "\xF0\x9F\x8D\x94",
                                             "\xF0\x9F\x8D\xA9", "\xF0\x9F\xA5\x97"};

template <class T>
const T& pick(const std::vector<T>& v, Rng& rng) {
  return v[rng.uniform_index(v.size())];
}

std::string fmt_double(double v) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

// Integer counts summing to `total`, proportional to `weights` (largest
// remainder, ties to the lower index).
std::vector<std::size_t> apportion(std::size_t total, const std::vector<double>& weights) {
  const double sum = std::accumulate(weights.begin(), weights.end(), 0.0);
  std::vector<std::size_t> counts(weights.size(), 0);
  std::vector<std::pair<double, std::size_t>> remainders;
  std::size_t used = 0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    const double exact = sum > 0 ? total * weights[i] / sum : 0.0;
    counts[i] = static_cast<std::size_t>(std::floor(exact));
    used += counts[i];
    remainders.emplace_back(exact - counts[i], i);
  }
  std::stable_sort(remainders.begin(), remainders.end(),
                   [](const auto& a, const auto& b) { return a.first > b.first; });
  for (std::size_t k = 0; used < total && k < remainders.size(); ++k, ++used) ++counts[remainders[k].second];
  return counts;
}

struct Surface {
  Rng& rng;

  // Renders tokens as messy tweet text: casing, URLs, mentions,
  // punctuation, emoji and the odd stuttered word.
  std::string render(std::vector<std::string> tokens, bool food) {
    if (rng.bernoulli(0.3) && !tokens.empty() && !tokens[0].empty() && tokens[0][0] >= 'a' &&
        tokens[0][0] <= 'z')
      tokens[0][0] = static_cast<char>(tokens[0][0] - 'a' + 'A');
    for (auto& t : tokens)
      if (t.size() > 1 && t[0] == '#' && rng.bernoulli(0.3) && t[1] >= 'a' && t[1] <= 'z')
        t[1] = static_cast<char>(t[1] - 'a' + 'A');
    if (rng.bernoulli(0.05)) {
      const auto pos = rng.uniform_index(tokens.size());
      const auto reps = 4 + rng.uniform_index(3);
      tokens.insert(tokens.begin() + static_cast<std::ptrdiff_t>(pos), reps, tokens[pos]);
    }
    std::string text;
    if (rng.bernoulli(0.1)) text += "@user" + std::to_string(rng.uniform_index(1000)) + " ";
    for (std::size_t i = 0; i < tokens.size(); ++i) {
      if (i) text += ' ';
      text += tokens[i];
      if (rng.bernoulli(0.04)) text += rng.bernoulli(0.5) ? "," : "...";
    }
    if (rng.bernoulli(0.25)) text += rng.bernoulli(0.5) ? "!!" : "?";
    if (rng.bernoulli(0.15)) {
      const auto& e = food && rng.bernoulli(0.5) ? pick(kFoodEmoji, rng) : pick(kEmoji, rng);
      text += ' ';
      const auto reps = 1 + rng.uniform_index(4);
      for (std::size_t k = 0; k < reps; ++k) text += e;
    }
    if (rng.bernoulli(0.1)) {
      static constexpr char kAlnum[] = "abcdefghijklmnopqrstuvwxyz0123456789ABCDEFGHIJKLMNOPQRSTUVWXYZ";
      text += " https://t.co/";
      for (int k = 0; k < 8; ++k) text += kAlnum[rng.uniform_index(sizeof kAlnum - 1)];
    }
    return text;
  }
};

}  // namespace

GeneratorConfig GeneratorConfig::defaults() {
  GeneratorConfig c;
  c.topics = {
      {"food",
       true,
       {"yum", "delicious", "lunch", "dinner", "hungry", "tasty", "craving", "snack"},
       {{"#pizza", {"pizza", "pepperoni", "slice", "crust"}},
        {"#burger", {"burger", "fries", "patty", "grill"}},
        {"#donut", {"donut", "glazed", "sprinkles", "bakery"}},
        {"#macncheese", {"macncheese", "cheesy", "noodles", "creamy"}},
        {"#salad", {"salad", "greens", "dressing", "veggies"}},
        {"#kale", {"kale", "smoothie", "detox", "organic"}}}},
      {"sports",
       false,
       {"team", "win", "season", "fans"},
       {{"#nba", {"nba", "basketball", "dunk", "playoffs"}},
        {"#football", {"football", "touchdown", "quarterback", "stadium"}}}},
      {"weather",
       false,
       {"cold", "outside", "forecast", "temperature"},
       {{"#snow", {"snow", "snowstorm", "shovel", "blizzard"}},
        {"#sunshine", {"sunshine", "sunny", "beach", "warm"}}}},
      {"music",
       false,
       {"song", "listen", "band", "lyrics"},
       {{"#concert", {"concert", "tickets", "stage", "crowd"}},
        {"#newmusic", {"newmusic", "album", "single", "playlist"}}}},
      {"politics",
       false,
       {"debate", "president", "policy", "senate"},
       {{"#election", {"election", "vote", "ballot", "candidate"}},
        {"#news", {"news", "breaking", "report", "headline"}}}},
      {"travel",
       false,
       {"trip", "vacation", "hotel", "luggage"},
       {{"#travel", {"travel", "flight", "airport", "passport"}},
        {"#roadtrip", {"roadtrip", "highway", "drive", "miles"}}}},
      {"work",
       false,
       {"work", "tired", "week", "coworkers"},
       {{"#mondays", {"mondays", "office", "meeting", "boss"}},
        {"#tgif", {"tgif", "weekend", "friday", "relax"}}}},
      {"tech",
       false,
       {"app", "screen", "download", "wifi"},
       {{"#iphone", {"iphone", "phone", "battery", "update"}},
        {"#gaming", {"gaming", "console", "level", "controller"}}}},
  };
  c.filler_words = {"i",    "the",  "so",    "just", "really", "today", "lol",   "omg",
                    "love", "feel", "like",  "good", "time",   "day",   "this",  "is",
                    "it",   "and",  "my",    "with", "now",    "got",   "go",    "what",
                    "we",   "you",  "right", "best", "ever",   "people", "night", "wow"};
  c.idioms = {"that problem is a hard nut to crack", "she is the cream of the crop"};
  c.extra_keywords = {{"yogurt", "database"}, {"nut", "database"},   {"cream", "database"},
                      {"sashimi", "press"},   {"kimchi", "press"},   {"blt", "press"}};
  return c;
}

void GeneratorConfig::validate() const {
  auto in_unit = [](double v) { return v >= 0.0 && v <= 1.0; };
  if (regions < 1) throw ValidationError("generator: regions must be at least 1");
  if (tweets_per_region < 1) throw ValidationError("generator: tweets_per_region must be at least 1");
  if (!in_unit(rate_min) || !in_unit(rate_max) || rate_min > rate_max)
    throw ValidationError("generator: rate_min/rate_max must satisfy 0 <= min <= max <= 1");
  if (!region_rates.empty() && region_rates.size() != regions)
    throw ValidationError("generator: region_rates needs one rate per region");
  for (double r : region_rates)
    if (!in_unit(r)) throw ValidationError("generator: region rate outside [0,1]");
  for (double p : {idiom_rate, hashtag_prob_food, hashtag_prob_other, driver_share_min,
                   driver_share_max, intensity_min, intensity_max})
    if (!in_unit(p)) throw ValidationError("generator: probability outside [0,1]");
  if (min_tokens < 1 || min_tokens > max_tokens)
    throw ValidationError("generator: need 1 <= min_tokens <= max_tokens");
  const auto n_food = std::count_if(topics.begin(), topics.end(), [](const Topic& t) { return t.food; });
  if (n_food != 1) throw ValidationError("generator: exactly one food topic is required");
  if (topics.size() < 2) throw ValidationError("generator: need at least one non-food topic");
  for (const auto& t : topics) {
    if (t.tags.empty()) throw ValidationError("generator: topic '" + t.name + "' has no hashtags");
    for (const auto& tag : t.tags)
      if (tag.hashtag.size() < 2 || tag.hashtag[0] != '#' || tag.words.empty())
        throw ValidationError("generator: topic '" + t.name + "' has a malformed hashtag entry");
  }
  const auto& food = *std::find_if(topics.begin(), topics.end(), [](const Topic& t) { return t.food; });
  if (food.tags.size() > 1 &&
      std::none_of(food.tags.begin(), food.tags.end(),
                   [&](const TopicTag& t) { return t.hashtag == driver_hashtag; }))
    throw ValidationError("generator: driver hashtag '" + driver_hashtag + "' is not a food hashtag");
  if (filler_words.empty()) throw ValidationError("generator: filler_words is empty");
  if (idiom_rate > 0 && idioms.empty()) throw ValidationError("generator: idiom_rate > 0 needs idioms");
}

std::string region_code(std::size_t index) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "R%02zu", index + 1);
  return buf;
}

SyntheticCorpus generate_synthetic_corpus(const GeneratorConfig& config, std::uint64_t seed) {
  config.validate();
  Rng rng(seed);

  const auto food_it = std::find_if(config.topics.begin(), config.topics.end(),
                                    [](const Topic& t) { return t.food; });
  const Topic& food = *food_it;
  std::vector<const Topic*> others;
  for (const auto& t : config.topics)
    if (!t.food) others.push_back(&t);
  std::size_t driver = 0;
  for (std::size_t i = 0; i < food.tags.size(); ++i)
    if (food.tags[i].hashtag == config.driver_hashtag) driver = i;

  SyntheticCorpus out;
  std::vector<corpus::Keyword> keywords;
  for (std::size_t i = 0; i < food.tags.size(); ++i)
    keywords.push_back({corpus::lemmatize(food.tags[i].hashtag.substr(1)), i % 3 == 2 ? "press" : "database"});
  for (const auto& k : config.extra_keywords) keywords.push_back(k);
  out.keywords = corpus::KeywordList(std::move(keywords));

  // Latent scores: one per stratum of [0,1), assigned to regions at random.
  std::vector<std::size_t> strata(config.regions);
  std::iota(strata.begin(), strata.end(), 0);
  rng.shuffle(strata.begin(), strata.end());
  std::vector<double> latent(config.regions);
  for (std::size_t r = 0; r < config.regions; ++r)
    latent[r] = (static_cast<double>(strata[r]) + rng.uniform01()) / static_cast<double>(config.regions);

  const std::size_t n = config.tweets_per_region;
  Surface surface{rng};

  for (std::size_t r = 0; r < config.regions; ++r) {
    const double z = latent[r];
    const double rate = config.region_rates.empty()
                            ? config.rate_min + (config.rate_max - config.rate_min) * z
                            : config.region_rates[r];
    const double share = config.driver_share_min + (config.driver_share_max - config.driver_share_min) * z;
    const double intensity = config.intensity_min + (config.intensity_max - config.intensity_min) * z;
    const auto n_food = static_cast<std::size_t>(std::llround(rate * static_cast<double>(n)));
    const auto n_idiom = std::min(n - n_food, static_cast<std::size_t>(
                                                  std::llround(config.idiom_rate * static_cast<double>(n))));

    std::vector<double> weights(food.tags.size(), food.tags.size() > 1 ? (1.0 - share) / (food.tags.size() - 1) : 1.0);
    if (food.tags.size() > 1) weights[driver] = share;
    const auto item_counts = apportion(n_food, weights);

    // Tweet plan: food item index, or -1 (plain) / -2 (idiom) for others.
    std::vector<int> plan;
    plan.reserve(n);
    for (std::size_t i = 0; i < item_counts.size(); ++i) plan.insert(plan.end(), item_counts[i], static_cast<int>(i));
    plan.insert(plan.end(), n_idiom, -2);
    plan.resize(n, -1);
    rng.shuffle(plan.begin(), plan.end());

    const std::string region = region_code(r);
    for (std::size_t k = 0; k < n; ++k) {
      const std::size_t len = config.min_tokens + rng.uniform_index(config.max_tokens - config.min_tokens + 1);
      std::vector<std::string> tokens;
      std::vector<std::string> tags;
      const bool is_food = plan[k] >= 0;
      if (is_food) {
        const auto& item = food.tags[static_cast<std::size_t>(plan[k])];
        tokens.push_back(item.words.front());
        while (tokens.size() < len) {
          if (rng.bernoulli(intensity))
            tokens.push_back(rng.bernoulli(0.5) ? pick(item.words, rng) : pick(food.shared_words, rng));
          else
            tokens.push_back(pick(config.filler_words, rng));
        }
        rng.shuffle(tokens.begin(), tokens.end());
        if (rng.bernoulli(config.hashtag_prob_food)) tags.push_back(item.hashtag);
      } else {
        const Topic& topic = *others[rng.uniform_index(others.size())];
        const std::size_t ti = rng.uniform_index(topic.tags.size());
        const auto& tag = topic.tags[ti];
        while (tokens.size() < len) {
          if (rng.bernoulli(0.6))
            tokens.push_back(rng.bernoulli(0.5) ? pick(tag.words, rng) : pick(topic.shared_words, rng));
          else
            tokens.push_back(pick(config.filler_words, rng));
        }
        if (plan[k] == -2) {
          std::istringstream idiom(pick(config.idioms, rng));
          std::vector<std::string> words{std::istream_iterator<std::string>(idiom), {}};
          const auto pos = static_cast<std::ptrdiff_t>(rng.uniform_index(tokens.size() + 1));
          tokens.insert(tokens.begin() + pos, words.begin(), words.end());
        }
        if (rng.bernoulli(config.hashtag_prob_other)) {
          tags.push_back(tag.hashtag);
          if (topic.tags.size() > 1 && rng.bernoulli(0.15))
            tags.push_back(topic.tags[(ti + 1) % topic.tags.size()].hashtag);
        }
      }
      for (auto& t : tags) {
        if (rng.bernoulli(0.7))
          tokens.push_back(t);
        else
          tokens.insert(tokens.begin() + static_cast<std::ptrdiff_t>(rng.uniform_index(tokens.size() + 1)), t);
      }
      char id[32];
      std::snprintf(id, sizeof id, "%s-%06zu", region.c_str(), k);
      out.tweets.push_back(corpus::make_record(id, region, surface.render(std::move(tokens), is_food)));
    }

    out.truth.push_back({region, config.target_base + config.target_slope * share,
                         static_cast<double>(n_food) / static_cast<double>(n), share, z});
  }
  return out;
}

void write_ground_truth(std::ostream& out, const std::vector<RegionTruth>& truth) {
  out << "region,target,food_rate\n";
  for (const auto& t : truth) out << t.region << ',' << fmt_double(t.target) << ',' << fmt_double(t.food_rate) << '\n';
}

std::vector<RegionTruth> read_ground_truth(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || !line.starts_with("region,target"))
    throw ValidationError("ground truth: expected header 'region,target,food_rate'");
  std::vector<RegionTruth> out;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (cells.size() < 2) throw ValidationError("ground truth line " + std::to_string(lineno) + ": expected region,target");
    RegionTruth t;
    t.region = cells[0];
    try {
      t.target = std::stod(cells[1]);
      if (cells.size() > 2) t.food_rate = std::stod(cells[2]);
    } catch (const std::exception&) {
      throw ValidationError("ground truth line " + std::to_string(lineno) + ": non-numeric value");
    }
    out.push_back(t);
  }
  return out;
}

}  // namespace tagsurv::synth
