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

#include "tagsurv/config.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <fstream>

#include "tagsurv/error.hpp"

namespace tagsurv::pipeline {

namespace {

constexpr unsigned kModelStages = kTrain | kFilter | kFeatures | kEvaluate | kReport;

constexpr std::array kKeys{
    // paths
    KeyInfo{"raw_tweets", "work/tweets.jsonl", KeyKind::path, kSynth | kPreprocess, "raw tweets, JSON lines"},
    KeyInfo{"ground_truth", "work/ground_truth.csv", KeyKind::path, kSynth | kFeatures,
            "region targets CSV (region,target[,food_rate])"},
    KeyInfo{"keywords", "work/keywords.txt", KeyKind::path,
            kSynth | kTrain | kFilter | kFeatures | kEvaluate | kReport, "food keyword list"},
    KeyInfo{"corpus", "work/corpus.jsonl", KeyKind::path,
            kPreprocess | kVocab | kTrain | kFilter | kFeatures | kEvaluate, "normalised tweets, JSON lines"},
    KeyInfo{"vocab", "work/vocab.tsv", KeyKind::path, kVocab | kModelStages, "vocabulary TSV"},
    KeyInfo{"stopwords", "", KeyKind::path, kVocab, "stopword file; empty uses the bundled list"},
    KeyInfo{"checkpoint", "work/model.ckpt", KeyKind::path, kModelStages, "encoder checkpoint"},
    KeyInfo{"food_tweets", "work/food_tweets.jsonl", KeyKind::path, kFilter | kFeatures,
            "food-related tweets selected by the filter"},
    KeyInfo{"features", "work/features.csv", KeyKind::path, kFeatures | kRegress | kReport, "region features CSV"},
    KeyInfo{"targets", "work/targets.csv", KeyKind::path, kFeatures | kRegress | kReport,
            "targets aligned with the feature rows"},
    KeyInfo{"regression_model", "work/elasticnet.txt", KeyKind::path, kRegress, "elastic-net model file"},
    KeyInfo{"predictions", "work/predictions.csv", KeyKind::path, kRegress | kEvaluate,
            "held-out region predictions"},
    KeyInfo{"report", "work/report.csv", KeyKind::path, kEvaluate, "metric report"},
    KeyInfo{"risk_report", "work/risk_factors.csv", KeyKind::path, kReport, "risk-factor correlation report"},
    KeyInfo{"manifest", "work/manifest.json", KeyKind::path, kAllStages, "run manifest"},
    // synthetic corpus
    KeyInfo{"synth_regions", "20", KeyKind::integer, kSynth, "number of regions"},
    KeyInfo{"synth_tweets_per_region", "500", KeyKind::integer, kSynth, "tweets per region"},
    KeyInfo{"synth_seed", "7", KeyKind::integer, kSynth, "generator seed"},
    KeyInfo{"synth_rate_min", "0.030", KeyKind::real, kSynth, "lowest food-tweet rate"},
    KeyInfo{"synth_rate_max", "0.062", KeyKind::real, kSynth, "highest food-tweet rate"},
    KeyInfo{"synth_idiom_rate", "0.002", KeyKind::real, kSynth, "share of idiom false positives"},
    KeyInfo{"synth_hashtag_prob_food", "1.0", KeyKind::real, kSynth, "hashtag probability, food tweets"},
    KeyInfo{"synth_hashtag_prob_other", "0.475", KeyKind::real, kSynth, "hashtag probability, other tweets"},
    KeyInfo{"synth_driver_share_min", "0.10", KeyKind::real, kSynth, "lowest driver-item share"},
    KeyInfo{"synth_driver_share_max", "0.70", KeyKind::real, kSynth, "highest driver-item share"},
    KeyInfo{"synth_intensity_min", "0.45", KeyKind::real, kSynth, "lowest food-token intensity"},
    KeyInfo{"synth_intensity_max", "0.85", KeyKind::real, kSynth, "highest food-token intensity"},
    KeyInfo{"synth_target_base", "22", KeyKind::real, kSynth, "target at zero driver share"},
    KeyInfo{"synth_target_slope", "20", KeyKind::real, kSynth, "target increase per unit driver share"},
    // vocabulary
    KeyInfo{"max_words", "500000", KeyKind::integer, kVocab, "word vocabulary size"},
    KeyInfo{"max_hashtags", "50000", KeyKind::integer, kVocab, "hashtag pool size"},
    // model
    KeyInfo{"dim", "64", KeyKind::integer, kTrain, "embedding dimension d"},
    KeyInfo{"max_len", "32", KeyKind::integer, kModelStages, "tweet length l in tokens"},
    KeyInfo{"window", "3", KeyKind::integer, kTrain, "convolution window K"},
    KeyInfo{"hidden", "256", KeyKind::integer, kTrain, "hidden width H"},
    KeyInfo{"margin", "0.1", KeyKind::real, kTrain, "hinge margin m"},
    KeyInfo{"max_neg_iters", "10", KeyKind::integer, kTrain, "negative sampling iterations M"},
    KeyInfo{"objective", "warp", KeyKind::choice, kTrain, "warp | binary"},
    KeyInfo{"k_top", "1", KeyKind::integer, kFilter | kEvaluate, "top-ranked hashtags checked for food"},
    KeyInfo{"scoring", "inner", KeyKind::choice, kFeatures, "inner | cosine"},
    // training
    KeyInfo{"epochs", "2", KeyKind::integer, kTrain, "training epochs"},
    KeyInfo{"learning_rate", "0.05", KeyKind::real, kTrain, "learning rate"},
    KeyInfo{"optimizer", "adagrad", KeyKind::choice, kTrain, "adagrad | sgd"},
    KeyInfo{"batch_size", "1", KeyKind::integer, kTrain, "records per update"},
    KeyInfo{"train_seed", "7", KeyKind::integer, kTrain | kEvaluate, "initialisation, shuffling and split seed"},
    KeyInfo{"valid_fraction", "0.1", KeyKind::real, kTrain | kEvaluate, "held-out tuning share of admitted tweets"},
    KeyInfo{"test_fraction", "0.1", KeyKind::real, kTrain | kEvaluate, "held-out test share of admitted tweets"},
    // filtering and features
    KeyInfo{"filter_method", "model", KeyKind::choice, kFilter, "model | keyword"},
    KeyInfo{"feature_method", "embedding", KeyKind::choice, kFeatures | kReport, "embedding | bow"},
    // regression
    KeyInfo{"trials", "50", KeyKind::integer, kRegress, "random-search trials"},
    KeyInfo{"regress_seed", "7", KeyKind::integer, kRegress, "region split and search seed"},
    KeyInfo{"folds", "5", KeyKind::integer, kRegress, "cross-validation folds over training regions"},
    // runtime
    KeyInfo{"pipeline_stages", "synth,preprocess,vocab,train,filter,features,regress,evaluate,report",
            KeyKind::text, 0, "stages run by 'pipeline'"},
    KeyInfo{"threads", "1", KeyKind::integer, kAllStages, "worker threads; 1 is fully deterministic"},
};

struct Choice {
  std::string_view key;
  std::array<std::string_view, 2> options;
};
constexpr std::array kChoices{
    Choice{"objective", {"warp", "binary"}},       Choice{"scoring", {"inner", "cosine"}},
    Choice{"optimizer", {"adagrad", "sgd"}},       Choice{"filter_method", {"model", "keyword"}},
    Choice{"feature_method", {"embedding", "bow"}},
};

std::string trim(std::string_view s) {
  auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

void check_value(const KeyInfo& k, const std::string& v) {
  auto bad = [&](const char* what) {
    throw ValidationError("config key '" + std::string(k.name) + "': expected " + what + ", got '" + v + "'");
  };
  switch (k.kind) {
    case KeyKind::integer: {
      std::uint64_t x = 0;
      auto res = std::from_chars(v.data(), v.data() + v.size(), x);
      if (v.empty() || res.ec != std::errc() || res.ptr != v.data() + v.size()) bad("a non-negative integer");
      break;
    }
    case KeyKind::real: {
      double x = 0;
      auto res = std::from_chars(v.data(), v.data() + v.size(), x);
      if (v.empty() || res.ec != std::errc() || res.ptr != v.data() + v.size() || !std::isfinite(x))
        bad("a finite number");
      break;
    }
    case KeyKind::choice: {
      for (const auto& c : kChoices)
        if (c.key == k.name && std::find(c.options.begin(), c.options.end(), v) == c.options.end()) {
          std::string msg = "config key '" + std::string(k.name) + "': expected one of";
          for (auto o : c.options) msg += " '" + std::string(o) + "'";
          throw ValidationError(msg + ", got '" + v + "'");
        }
      break;
    }
    case KeyKind::path:
    case KeyKind::text:
      break;
  }
}

}  // namespace

std::span<const KeyInfo> config_keys() { return kKeys; }

const KeyInfo* find_key(std::string_view name) {
  for (const auto& k : kKeys)
    if (k.name == name) return &k;
  return nullptr;
}

PipelineConfig::PipelineConfig() {
  for (const auto& k : kKeys) values_.emplace(std::string(k.name), std::string(k.default_value));
}

void PipelineConfig::load_file(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw IoError("cannot open config file '" + file.string() + "'");
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos)
      throw ValidationError(file.string() + ":" + std::to_string(lineno) + ": expected 'key = value'");
    const auto key = trim(std::string_view(t).substr(0, eq));
    if (!find_key(key))
      throw ValidationError(file.string() + ":" + std::to_string(lineno) + ": unknown config key '" + key + "'");
    set(key, trim(std::string_view(t).substr(eq + 1)));
  }
  base_dir_ = file.has_parent_path() ? file.parent_path() : std::filesystem::path(".");
}

void PipelineConfig::set(std::string_view key, std::string_view value) {
  const KeyInfo* k = find_key(key);
  if (!k) throw ValidationError("unknown config key '" + std::string(key) + "'");
  std::string v(value);
  check_value(*k, v);
  values_[std::string(key)] = std::move(v);
}

const std::string& PipelineConfig::get(std::string_view key) const {
  auto it = values_.find(key);
  if (it == values_.end()) throw ValidationError("unknown config key '" + std::string(key) + "'");
  return it->second;
}

std::size_t PipelineConfig::get_count(std::string_view key) const {
  return static_cast<std::size_t>(get_seed(key));
}

std::uint64_t PipelineConfig::get_seed(std::string_view key) const {
  const auto& v = get(key);
  std::uint64_t x = 0;
  auto res = std::from_chars(v.data(), v.data() + v.size(), x);
  if (v.empty() || res.ec != std::errc() || res.ptr != v.data() + v.size())
    throw ValidationError("config key '" + std::string(key) + "': expected a non-negative integer, got '" + v + "'");
  return x;
}

double PipelineConfig::get_real(std::string_view key) const {
  const auto& v = get(key);
  double x = 0;
  auto res = std::from_chars(v.data(), v.data() + v.size(), x);
  if (v.empty() || res.ec != std::errc() || res.ptr != v.data() + v.size() || !std::isfinite(x))
    throw ValidationError("config key '" + std::string(key) + "': expected a finite number, got '" + v + "'");
  return x;
}

std::filesystem::path PipelineConfig::path(std::string_view key) const {
  std::filesystem::path p(get(key));
  if (p.empty() || p.is_absolute()) return p;
  return base_dir_ / p;
}

std::string PipelineConfig::canonical() const {
  std::string out;
  for (const auto& [k, v] : values_) out += k + "=" + v + "\n";
  return out;
}

}  // namespace tagsurv::pipeline
