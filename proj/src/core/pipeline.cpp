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

#include "tagsurv/pipeline.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>

#include "json.hpp"
#include "tagsurv/corpus.hpp"
#include "tagsurv/error.hpp"
#include "tagsurv/eval.hpp"
#include "tagsurv/features.hpp"
#include "tagsurv/regress.hpp"
#include "tagsurv/synth.hpp"
#include "tagsurv/tagspace.hpp"

namespace tagsurv::pipeline {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

constexpr std::array kStages{
    StageInfo{"synth", kSynth, "generate a synthetic corpus, region targets and keywords"},
    StageInfo{"preprocess", kPreprocess, "normalise raw tweets"},
    StageInfo{"vocab", kVocab, "build the word vocabulary and hashtag pool"},
    StageInfo{"train", kTrain, "train the tweet encoder"},
    StageInfo{"filter", kFilter, "select food-related tweets"},
    StageInfo{"features", kFeatures, "aggregate region features and align targets"},
    StageInfo{"regress", kRegress, "fit the elastic-net regression"},
    StageInfo{"evaluate", kEvaluate, "write the metric report"},
    StageInfo{"report", kReport, "rank features by Spearman correlation with targets"},
    StageInfo{"pipeline", 0, "run every stage listed in pipeline_stages"},
};

std::string fmt(double v) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string hex_digest(const unsigned char* data, unsigned len) {
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  for (unsigned i = 0; i < len; ++i) {
    out += kHex[data[i] >> 4];
    out += kHex[data[i] & 15];
  }
  return out;
}

std::string sha256(std::string_view bytes) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr) != 1)
    throw Error("SHA-256 digest failed");
  return hex_digest(md, len);
}

// Tracks the files a stage touches for the manifest.
class StageContext {
 public:
  StageContext(std::string_view stage, const PipelineConfig& config, std::ostream& log)
      : stage_(stage), config_(config), log_(log) {}

  const PipelineConfig& config() const { return config_; }
  std::ostream& log() { return log_; }

  fs::path input(std::string_view key) {
    if (!config_.has_path(key)) throw ValidationError("config key '" + std::string(key) + "' is empty");
    auto p = config_.path(key);
    if (!fs::is_regular_file(p))
      throw IoError("missing input file '" + p.string() + "' (config key '" + std::string(key) + "')");
    inputs_.emplace_back(key, p);
    return p;
  }

  std::ifstream open_input(std::string_view key) {
    auto p = input(key);
    std::ifstream in(p, std::ios::binary);
    if (!in) throw IoError("cannot read '" + p.string() + "' (config key '" + std::string(key) + "')");
    return in;
  }

  // Writes a whole output file; the writer fills a buffer first so a
  // failed stage never leaves a partial artifact behind.
  template <class Fn>
  void write_output(std::string_view key, Fn&& fill) {
    if (!config_.has_path(key)) throw ValidationError("config key '" + std::string(key) + "' is empty");
    auto p = config_.path(key);
    std::ostringstream buf;
    fill(buf);
    write_file(p, key, buf.str());
    outputs_.emplace_back(key, p);
  }

  void finish() {
    const auto manifest = config_.path("manifest");
    json m = json::object();
    if (fs::is_regular_file(manifest)) {
      std::ifstream in(manifest, std::ios::binary);
      try {
        m = json::parse(in);
      } catch (const json::exception&) {
        throw ValidationError("manifest '" + manifest.string() + "' is not valid JSON");
      }
      if (!m.is_object()) m = json::object();
    }
    const auto canonical = config_.canonical();
    m["config_hash"] = sha256(canonical);
    json cfg = json::object();
    for (const auto& [k, v] : config_.values()) cfg[k] = v;
    m["config"] = cfg;
    m["seeds"] = {{"synth_seed", config_.get_seed("synth_seed")},
                  {"train_seed", config_.get_seed("train_seed")},
                  {"regress_seed", config_.get_seed("regress_seed")}};
    json entry = json::object();
    entry["inputs"] = describe(inputs_);
    entry["outputs"] = describe(outputs_);
    m["stages"][stage_] = entry;
    write_file(manifest, "manifest", m.dump(2) + "\n");
  }

 private:
  json describe(const std::vector<std::pair<std::string, fs::path>>& files) const {
    json out = json::object();
    for (const auto& [key, p] : files) out[key] = {{"path", config_.get(key)}, {"sha256", file_digest(p)}};
    return out;
  }

  static void write_file(const fs::path& p, std::string_view key, const std::string& bytes) {
    std::error_code ec;
    if (p.has_parent_path()) fs::create_directories(p.parent_path(), ec);
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write '" + p.string() + "' (config key '" + std::string(key) + "')");
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    out.close();
    if (!out) throw IoError("write failed for '" + p.string() + "' (config key '" + std::string(key) + "')");
  }

  std::string stage_;
  const PipelineConfig& config_;
  std::ostream& log_;
  std::vector<std::pair<std::string, fs::path>> inputs_;
  std::vector<std::pair<std::string, fs::path>> outputs_;
};

corpus::Vocabulary load_vocab(StageContext& ctx) {
  auto in = ctx.open_input("vocab");
  return corpus::Vocabulary::load(in);
}

corpus::KeywordList load_keywords(StageContext& ctx) {
  auto in = ctx.open_input("keywords");
  return corpus::parse_keywords(in);
}

std::vector<corpus::TweetRecord> load_tweets(StageContext& ctx, std::string_view key) {
  auto in = ctx.open_input(key);
  return corpus::read_tweets(in);
}

tagspace::EncoderParams load_checkpoint(StageContext& ctx, const corpus::Vocabulary& vocab) {
  auto in = ctx.open_input("checkpoint");
  auto params = tagspace::EncoderParams::load(in);
  if (params.word_table.rows() != vocab.table_rows() || params.tag_row_offset != vocab.tag_row_offset() ||
      params.pool_size != vocab.pool_size())
    throw ValidationError("checkpoint does not match the vocabulary (config keys 'checkpoint', 'vocab')");
  return params;
}

// Tweets with at least one pooled hashtag, in corpus order.
struct Admitted {
  std::vector<tagspace::EncodedTweet> tweets;
  std::vector<std::size_t> source;  // corpus index
};

Admitted admit(std::span<const corpus::TweetRecord> records, const corpus::Vocabulary& vocab,
               std::span<const std::uint32_t> food_tags, std::size_t max_len) {
  Admitted a;
  for (std::size_t i = 0; i < records.size(); ++i) {
    auto tags = corpus::pooled_hashtags(records[i], vocab);
    if (tags.empty()) continue;
    tagspace::EncodedTweet t;
    t.ids = corpus::encode_tweet(records[i], vocab, max_len);
    t.food = std::any_of(tags.begin(), tags.end(), [&](std::uint32_t g) {
      return std::find(food_tags.begin(), food_tags.end(), g) != food_tags.end();
    });
    t.tags = std::move(tags);
    a.tweets.push_back(std::move(t));
    a.source.push_back(i);
  }
  return a;
}

std::vector<std::string> feature_names(StageContext& ctx, std::size_t width) {
  const auto& cfg = ctx.config();
  std::vector<std::string> names;
  if (cfg.get("feature_method") == "bow") {
    for (const auto& k : load_keywords(ctx).entries()) names.push_back(k.term);
  } else {
    auto vocab = load_vocab(ctx);
    names = features::keyword_tags(load_keywords(ctx), vocab).names;
  }
  if (names.size() != width)
    throw ValidationError("features have " + std::to_string(width) + " columns but the keyword set gives " +
                          std::to_string(names.size()) + " (config key 'features')");
  return names;
}

struct Table {
  numeric::Matrix X;
  std::vector<double> y;
  std::vector<std::string> regions;
};

Table load_table(StageContext& ctx) {
  std::vector<features::RegionFeatures> rows;
  {
    auto in = ctx.open_input("features");
    rows = features::read_features(in);
  }
  std::vector<std::pair<std::string, double>> targets;
  {
    auto in = ctx.open_input("targets");
    targets = features::read_targets(in);
  }
  std::map<std::string, double> by_region(targets.begin(), targets.end());
  Table t;
  const std::size_t width = rows.empty() ? 0 : rows.front().x.size();
  t.X = numeric::Matrix(rows.size(), width);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    auto it = by_region.find(rows[i].region);
    if (it == by_region.end())
      throw ValidationError("region '" + rows[i].region + "' has no target (config key 'targets')");
    std::copy(rows[i].x.begin(), rows[i].x.end(), t.X.row(i).begin());
    t.y.push_back(it->second);
    t.regions.push_back(rows[i].region);
  }
  return t;
}

// ---------------------------------------------------------------- stages

void stage_synth(StageContext& ctx) {
  const auto& c = ctx.config();
  auto g = synth::GeneratorConfig::defaults();
  g.regions = c.get_count("synth_regions");
  g.tweets_per_region = c.get_count("synth_tweets_per_region");
  g.rate_min = c.get_real("synth_rate_min");
  g.rate_max = c.get_real("synth_rate_max");
  g.idiom_rate = c.get_real("synth_idiom_rate");
  g.hashtag_prob_food = c.get_real("synth_hashtag_prob_food");
  g.hashtag_prob_other = c.get_real("synth_hashtag_prob_other");
  g.driver_share_min = c.get_real("synth_driver_share_min");
  g.driver_share_max = c.get_real("synth_driver_share_max");
  g.intensity_min = c.get_real("synth_intensity_min");
  g.intensity_max = c.get_real("synth_intensity_max");
  g.target_base = c.get_real("synth_target_base");
  g.target_slope = c.get_real("synth_target_slope");
  g.validate();
  const auto data = synth::generate_synthetic_corpus(g, c.get_seed("synth_seed"));
  ctx.write_output("raw_tweets", [&](std::ostream& o) { corpus::write_tweets(o, data.tweets, false); });
  ctx.write_output("ground_truth", [&](std::ostream& o) { synth::write_ground_truth(o, data.truth); });
  ctx.write_output("keywords", [&](std::ostream& o) { corpus::write_keywords(o, data.keywords); });
  ctx.log() << "synth: " << data.tweets.size() << " tweets in " << data.truth.size() << " regions\n";
}

void stage_preprocess(StageContext& ctx) {
  const auto raw = load_tweets(ctx, "raw_tweets");
  std::vector<corpus::TweetRecord> out;
  out.reserve(raw.size());
  std::size_t dropped = 0;
  for (const auto& r : raw) {
    const auto tokens = corpus::normalize_text(r.text);
    if (tokens.empty()) {
      ++dropped;
      continue;
    }
    corpus::TweetRecord rec{r.id, r.region, corpus::join_tokens(tokens), corpus::extract_hashtags(tokens)};
    out.push_back(std::move(rec));
  }
  ctx.write_output("corpus", [&](std::ostream& o) { corpus::write_tweets(o, out, true); });
  ctx.log() << "preprocess: " << out.size() << " tweets kept, " << dropped << " empty after normalisation\n";
}

void stage_vocab(StageContext& ctx) {
  const auto& c = ctx.config();
  const auto tweets = load_tweets(ctx, "corpus");
  corpus::StopwordSet custom;
  const corpus::StopwordSet* stop = &corpus::default_stopwords();
  if (c.has_path("stopwords")) {
    custom = corpus::load_stopwords(ctx.input("stopwords").string());
    stop = &custom;
  }
  const auto vocab = corpus::build_vocabulary(std::span<const corpus::TweetRecord>(tweets),
                                              c.get_count("max_words"), c.get_count("max_hashtags"), *stop);
  ctx.write_output("vocab", [&](std::ostream& o) { vocab.save(o); });
  ctx.log() << "vocab: " << vocab.num_words() << " words, " << vocab.pool_size() << " hashtags\n";
}

tagspace::Hyper hyper_from(const PipelineConfig& c) {
  tagspace::Hyper h;
  h.dim = c.get_count("dim");
  h.max_len = c.get_count("max_len");
  h.window = c.get_count("window");
  h.hidden = c.get_count("hidden");
  h.margin = c.get_real("margin");
  h.max_neg_iters = c.get_count("max_neg_iters");
  h.objective = tagspace::parse_objective(c.get("objective"));
  h.validate();
  return h;
}

tagspace::DataSplit tweet_split(const PipelineConfig& c, std::size_t n) {
  return tagspace::split_indices(n, c.get_seed("train_seed"), c.get_real("valid_fraction"),
                                 c.get_real("test_fraction"));
}

void stage_train(StageContext& ctx) {
  const auto& c = ctx.config();
  const auto hyper = hyper_from(c);
  const auto tweets = load_tweets(ctx, "corpus");
  const auto vocab = load_vocab(ctx);
  const auto kw = features::keyword_tags(load_keywords(ctx), vocab);
  const auto admitted = admit(tweets, vocab, kw.tag_ids, hyper.max_len);
  if (admitted.tweets.empty()) throw ValidationError("no tweet carries a pooled hashtag (config key 'corpus')");
  const auto split = tweet_split(c, admitted.tweets.size());
  std::vector<tagspace::EncodedTweet> train_set;
  for (auto i : split.train) train_set.push_back(admitted.tweets[i]);

  tagspace::TrainConfig tc;
  tc.epochs = c.get_count("epochs");
  tc.learning_rate = c.get_real("learning_rate");
  tc.optimizer = tagspace::parse_optimizer(c.get("optimizer"));
  tc.batch_size = c.get_count("batch_size");
  tc.seed = c.get_seed("train_seed");
  tc.threads = c.get_count("threads");
  tc.validate();
  const auto init = tagspace::EncoderParams::init(hyper, vocab.table_rows(), vocab.tag_row_offset(),
                                                  vocab.pool_size(), derive_seed(tc.seed, 0x1417, 0));
  tagspace::TrainReport report;
  auto params = tagspace::train(init, train_set, tc, &report, [&](std::size_t epoch, double loss) {
    ctx.log() << "train: epoch " << epoch + 1 << " mean loss " << fmt(loss) << "\n";
  });
  if (!params.all_finite()) throw Error("training diverged: non-finite parameters");
  ctx.write_output("checkpoint", [&](std::ostream& o) { params.save(o); });
  ctx.log() << "train: " << report.admitted << " admitted tweets, " << report.updates << " updates\n";
}

void stage_filter(StageContext& ctx) {
  const auto& c = ctx.config();
  const auto tweets = load_tweets(ctx, "corpus");
  const auto keywords = load_keywords(ctx);
  std::vector<corpus::TweetRecord> food;
  if (c.get("filter_method") == "keyword") {
    for (const auto& t : tweets)
      if (features::keyword_match(t, keywords)) food.push_back(t);
  } else {
    const auto vocab = load_vocab(ctx);
    const auto params = load_checkpoint(ctx, vocab);
    const auto kw = features::keyword_tags(keywords, vocab);
    const auto k_top = c.get_count("k_top");
    for (const auto& t : tweets) {
      const auto emb = tagspace::encode(corpus::encode_tweet(t, vocab, params.hyper.max_len), params);
      if (tagspace::classify_food(emb, params, kw.tag_ids, k_top)) food.push_back(t);
    }
  }
  ctx.write_output("food_tweets", [&](std::ostream& o) { corpus::write_tweets(o, food, true); });
  ctx.log() << "filter: " << food.size() << " of " << tweets.size() << " tweets are food-related\n";
}

void stage_features(StageContext& ctx) {
  const auto& c = ctx.config();
  const auto all = load_tweets(ctx, "corpus");
  const auto food = load_tweets(ctx, "food_tweets");
  const auto keywords = load_keywords(ctx);
  std::vector<std::pair<std::string, double>> truth;
  {
    auto in = ctx.open_input("ground_truth");
    truth = features::read_targets(in);
  }
  std::map<std::string, double> target_of(truth.begin(), truth.end());

  std::map<std::string, std::size_t> totals;
  for (const auto& t : all) ++totals[t.region];
  std::map<std::string, std::vector<corpus::TweetRecord>> by_region;
  for (const auto& t : food) by_region[t.region].push_back(t);

  const bool bow = c.get("feature_method") == "bow";
  std::optional<corpus::Vocabulary> vocab;
  std::optional<tagspace::EncoderParams> params;
  features::KeywordTags kw;
  const auto scoring = features::parse_scoring(c.get("scoring"));
  if (!bow) {
    vocab = load_vocab(ctx);
    params = load_checkpoint(ctx, *vocab);
    kw = features::keyword_tags(keywords, *vocab);
    if (kw.tag_ids.empty()) throw ValidationError("no keyword matches a pooled hashtag (config key 'keywords')");
    for (const auto& d : kw.dropped) ctx.log() << "features: keyword '" << d << "' has no pooled hashtag\n";
  }

  std::vector<features::RegionFeatures> rows;
  std::vector<std::pair<std::string, double>> targets;
  for (const auto& [region, n_total] : totals) {
    auto it = by_region.find(region);
    if (it == by_region.end()) {
      ctx.log() << "warning: region '" << region << "' has no food-related tweets; dropped\n";
      continue;
    }
    auto t = target_of.find(region);
    if (t == target_of.end())
      throw ValidationError("region '" + region + "' has no target (config key 'ground_truth')");
    features::RegionFeatures row{region, {}, it->second.size(), n_total};
    if (bow) {
      row.x = features::bow_features(it->second, keywords);
    } else {
      std::vector<numeric::Vector> embs;
      embs.reserve(it->second.size());
      for (const auto& r : it->second)
        embs.push_back(tagspace::encode(corpus::encode_tweet(r, *vocab, params->hyper.max_len), *params));
      row.x = features::extract_features(features::region_embedding(embs), kw.tag_ids, *params, scoring);
    }
    rows.push_back(std::move(row));
    targets.emplace_back(region, t->second);
  }
  for (const auto& [region, list] : by_region)
    if (!totals.count(region)) throw ValidationError("food tweet region '" + region + "' is not in the corpus");
  if (rows.empty()) throw ValidationError("no region has food-related tweets (config key 'food_tweets')");
  ctx.write_output("features", [&](std::ostream& o) { features::write_features(o, rows); });
  ctx.write_output("targets", [&](std::ostream& o) { features::write_targets(o, targets); });
  ctx.log() << "features: " << rows.size() << " regions x " << rows.front().x.size() << " features\n";
}

void stage_regress(StageContext& ctx) {
  const auto& c = ctx.config();
  auto t = load_table(ctx);
  const auto split = regress::split_regions(t.regions, c.get_seed("regress_seed"));
  auto result = regress::random_search(t.X, t.y, t.regions, split, c.get_count("trials"),
                                       c.get_seed("regress_seed"), c.get_count("folds"), c.get_count("threads"));
  for (std::size_t j = 0; j < t.X.cols(); ++j) result.model.feature_names.push_back(features::feature_column(j));
  ctx.write_output("regression_model", [&](std::ostream& o) { result.model.save(o); });
  ctx.write_output("predictions", [&](std::ostream& o) {
    o << "region,predicted,actual\n";
    for (std::size_t i = 0; i < t.regions.size(); ++i) {
      if (std::find(split.test.begin(), split.test.end(), t.regions[i]) == split.test.end()) continue;
      o << t.regions[i] << ',' << fmt(regress::predict(result.model, t.X.row(i))) << ',' << fmt(t.y[i]) << '\n';
    }
  });
  ctx.log() << "regress: lambda1 " << fmt(result.best.lambda1) << " lambda2 " << fmt(result.best.lambda2)
            << " validation MAE " << fmt(result.best.validation_mae) << "\n";
}

struct Prediction {
  std::vector<std::string> regions;
  std::vector<double> predicted, target;
};

Prediction read_predictions(std::istream& in) {
  Prediction p;
  std::string line;
  if (!std::getline(in, line) || line.rfind("region,predicted,actual", 0) != 0)
    throw ValidationError("predictions: expected header 'region,predicted,actual'");
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::array<std::string, 3> f;
    std::size_t start = 0;
    for (std::size_t k = 0; k < 3; ++k) {
      auto comma = line.find(',', start);
      if ((k < 2) == (comma == std::string::npos))
        throw ValidationError("predictions line " + std::to_string(lineno) + ": expected 3 fields");
      f[k] = line.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
      start = comma + 1;
    }
    double v[2];
    for (int k = 0; k < 2; ++k) {
      const auto& s = f[k + 1];
      auto res = std::from_chars(s.data(), s.data() + s.size(), v[k]);
      if (s.empty() || res.ec != std::errc() || res.ptr != s.data() + s.size() || !std::isfinite(v[k]))
        throw ValidationError("predictions line " + std::to_string(lineno) + ": bad number '" + s + "'");
    }
    p.regions.push_back(f[0]);
    p.predicted.push_back(v[0]);
    p.target.push_back(v[1]);
  }
  return p;
}

std::string opt_fmt(const std::optional<double>& v) { return v ? fmt(*v) : std::string(); }

void stage_evaluate(StageContext& ctx) {
  const auto& c = ctx.config();
  const auto tweets = load_tweets(ctx, "corpus");
  const auto vocab = load_vocab(ctx);
  const auto keywords = load_keywords(ctx);
  const auto params = load_checkpoint(ctx, vocab);
  Prediction pred;
  {
    auto in = ctx.open_input("predictions");
    pred = read_predictions(in);
  }
  const auto kw = features::keyword_tags(keywords, vocab);
  const auto admitted = admit(tweets, vocab, kw.tag_ids, params.hyper.max_len);
  const auto split = tweet_split(c, admitted.tweets.size());
  const auto k_top = c.get_count("k_top");

  std::vector<eval::RankingJudgment> judgments;
  std::vector<bool> predicted, labels;
  for (auto i : split.test) {
    const auto& t = admitted.tweets[i];
    const auto emb = tagspace::encode(t.ids, params);
    judgments.push_back({tagspace::rank_hashtags(emb, params, 10), t.tags});
    predicted.push_back(tagspace::classify_food(emb, params, kw.tag_ids, k_top));
    labels.push_back(t.food);
  }
  std::vector<std::string> regions;
  for (const auto& t : tweets)
    if (std::find(regions.begin(), regions.end(), t.region) == regions.end()) regions.push_back(t.region);
  const auto rates = features::food_rate(tweets, regions,
                                         [&](const corpus::TweetRecord& r) { return features::keyword_match(r, keywords); });

  std::ostringstream report;
  report << "#metric hashtag_ranking\nmetric,value\n";
  report << "objective," << tagspace::to_string(params.hyper.objective) << "\n";
  report << "test_tweets," << judgments.size() << "\n";
  if (!judgments.empty()) {
    report << "p_at_1," << fmt(eval::precision_at_k(judgments, 1)) << "\n";
    report << "r_at_10," << fmt(eval::recall_at_k(judgments, 10)) << "\n";
  }
  const auto bin = eval::precision_recall_binary(predicted, labels);
  report << "#metric food_classification\nmetric,value\n";
  report << "k_top," << k_top << "\n";
  report << "precision," << opt_fmt(bin.precision) << "\n";
  report << "recall," << opt_fmt(bin.recall) << "\n";
  report << "prevalence," << fmt(bin.prevalence) << "\n";
  report << "tp," << bin.tp << "\nfp," << bin.fp << "\nfn," << bin.fn << "\ntn," << bin.tn << "\n";
  report << "#metric keyword_food_rate\nregion,food_rate\n";
  for (const auto& [region, rate] : rates) report << region << ',' << opt_fmt(rate) << "\n";
  report << "#metric regression\nmetric,value\n";
  report << "test_regions," << pred.regions.size() << "\n";
  if (!pred.regions.empty()) report << "mae," << fmt(eval::mae(pred.predicted, pred.target)) << "\n";
  std::optional<double> r;
  if (pred.regions.size() >= 2) {
    try {
      r = eval::pearson(pred.predicted, pred.target);
    } catch (const ValidationError&) {
      ctx.log() << "warning: Pearson correlation undefined for constant predictions or targets\n";
    }
  }
  report << "pearson," << opt_fmt(r) << "\n";
  ctx.write_output("report", [&](std::ostream& o) { o << report.str(); });
  ctx.log() << "evaluate: " << judgments.size() << " held-out tweets, " << pred.regions.size()
            << " held-out regions\n";
}

void stage_report(StageContext& ctx) {
  auto t = load_table(ctx);
  const auto names = feature_names(ctx, t.X.cols());
  const auto report = eval::risk_factor_report(t.X, t.y, names);
  ctx.write_output("risk_report", [&](std::ostream& o) { eval::write_risk_report(o, report); });
  if (!report.empty())
    ctx.log() << "report: top risk factor " << report.front().feature << " (" << t.regions.size()
              << " regions)\n";
}

void run_one(const StageInfo& s, const PipelineConfig& config, std::ostream& log) {
  StageContext ctx(s.name, config, log);
  switch (s.bit) {
    case kSynth: stage_synth(ctx); break;
    case kPreprocess: stage_preprocess(ctx); break;
    case kVocab: stage_vocab(ctx); break;
    case kTrain: stage_train(ctx); break;
    case kFilter: stage_filter(ctx); break;
    case kFeatures: stage_features(ctx); break;
    case kRegress: stage_regress(ctx); break;
    case kEvaluate: stage_evaluate(ctx); break;
    case kReport: stage_report(ctx); break;
    default: throw ValidationError("unknown stage '" + std::string(s.name) + "'");
  }
  ctx.finish();
}

}  // namespace

std::span<const StageInfo> stage_table() { return kStages; }

const StageInfo* find_stage(std::string_view name) {
  for (const auto& s : kStages)
    if (s.name == name) return &s;
  return nullptr;
}

void run_stage(std::string_view name, const PipelineConfig& config, std::ostream& log) {
  const StageInfo* s = find_stage(name);
  if (!s) throw ValidationError("unknown subcommand '" + std::string(name) + "'");
  if (s->bit != 0) return run_one(*s, config, log);

  std::vector<const StageInfo*> plan;
  std::string_view list = config.get("pipeline_stages");
  while (!list.empty()) {
    auto comma = list.find(',');
    auto item = list.substr(0, comma);
    while (!item.empty() && item.front() == ' ') item.remove_prefix(1);
    while (!item.empty() && item.back() == ' ') item.remove_suffix(1);
    const StageInfo* st = find_stage(item);
    if (!st || st->bit == 0)
      throw ValidationError("config key 'pipeline_stages': unknown stage '" + std::string(item) + "'");
    plan.push_back(st);
    list = comma == std::string_view::npos ? std::string_view() : list.substr(comma + 1);
  }
  if (plan.empty()) throw ValidationError("config key 'pipeline_stages' is empty");
  for (const auto* st : plan) {
    log << "== " << st->name << "\n";
    run_one(*st, config, log);
  }
}

std::string file_digest(const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw IoError("cannot read '" + file.string() + "'");
  EVP_MD_CTX* md = EVP_MD_CTX_new();
  if (!md) throw Error("SHA-256 context allocation failed");
  EVP_DigestInit_ex(md, EVP_sha256(), nullptr);
  std::array<char, 1 << 16> buf;
  while (in) {
    in.read(buf.data(), buf.size());
    if (in.gcount() > 0) EVP_DigestUpdate(md, buf.data(), static_cast<std::size_t>(in.gcount()));
  }
  unsigned char out[EVP_MAX_MD_SIZE];
  unsigned len = 0;
  EVP_DigestFinal_ex(md, out, &len);
  EVP_MD_CTX_free(md);
  return hex_digest(out, len);
}

}  // namespace tagsurv::pipeline
