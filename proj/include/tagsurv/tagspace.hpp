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

// Convolutional tweet encoder trained with hashtag supervision:
//
//   e_conv(w) = tanh(affine(maxpool(tanh(conv1d(lookup(w))))))
//   f(w, t)   = e_conv(w) . e(t)
//
// where e(t) is the word-table row of hashtag t. Two objectives are
// supported: a sampled pairwise ranking hinge over the hashtag pool
// (warp) and a single-class-vector hinge for food relevance (binary).

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "tagsurv/numeric.hpp"
#include "tagsurv/random.hpp"

namespace tagsurv::tagspace {

using numeric::Matrix;
using numeric::Real;
using numeric::Vector;

enum class Objective { warp, binary };
enum class OptimizerKind { sgd, adagrad };

std::string to_string(Objective o);
Objective parse_objective(const std::string& s);
std::string to_string(OptimizerKind o);
OptimizerKind parse_optimizer(const std::string& s);

struct Hyper {
  std::size_t dim = 64;            // d
  std::size_t max_len = 32;        // l
  std::size_t window = 3;          // K
  std::size_t hidden = 256;        // H
  double margin = 0.1;             // m
  std::size_t max_neg_iters = 10;  // M
  Objective objective = Objective::warp;

  void validate() const;
  bool operator==(const Hyper&) const = default;
};

struct EncoderParams {
  Hyper hyper;
  Matrix word_table;    // words, OOV sentinel, then hashtag rows
  Matrix conv_weights;  // (K*d) x H
  Vector conv_bias;     // H
  Matrix proj_weights;  // H x d
  Vector proj_bias;     // d
  Vector class_vector;  // d, binary head
  std::size_t tag_row_offset = 0;
  std::size_t pool_size = 0;

  // Tables drawn from uniform(-1/sqrt(d), 1/sqrt(d)); biases and the class
  // vector start at zero.
  static EncoderParams init(const Hyper& hyper, std::size_t table_rows, std::size_t tag_row_offset,
                            std::size_t pool_size, std::uint64_t seed);

  std::span<const Real> tag_row(std::uint32_t tag) const;
  bool all_finite() const;
  bool operator==(const EncoderParams&) const = default;

  // Header line "d l K H m M objective", then named sections, each a
  // matrix in numeric text format.
  void save(std::ostream& out) const;
  static EncoderParams load(std::istream& in);
};

// Forward intermediates kept for backpropagation.
struct EncodeTrace {
  std::vector<std::int32_t> ids;  // trailing padding trimmed
  Matrix embedded;
  Matrix hidden;  // tanh(conv)
  numeric::PoolResult pooled;
  Vector output;  // e_conv(w)
};

EncodeTrace encode_traced(std::span<const std::int32_t> ids, const EncoderParams& params);
Vector encode(std::span<const std::int32_t> ids, const EncoderParams& params);

// Accumulated gradients for one update.
struct Gradients {
  numeric::RowGrads word_table;
  Matrix conv_weights;
  Vector conv_bias;
  Matrix proj_weights;
  Vector proj_bias;
  Vector class_vector;
  bool class_touched = false;

  explicit Gradients(const EncoderParams& params);
  void merge(const Gradients& other);
};

// Adds d(loss)/d(params) given d(loss)/d(e_conv).
void encode_backward(const EncodeTrace& trace, const EncoderParams& params,
                     std::span<const Real> grad_output, Gradients& grads);

class Optimizer {
 public:
  Optimizer(OptimizerKind kind, double learning_rate, const EncoderParams& params);
  void apply(EncoderParams& params, const Gradients& grads);

 private:
  OptimizerKind kind_;
  double lr_;
  // Adagrad accumulators, same shapes as the parameters.
  Matrix acc_table_, acc_conv_w_, acc_proj_w_;
  Vector acc_conv_b_, acc_proj_b_, acc_class_;
};

struct EncodedTweet {
  std::vector<std::int32_t> ids;
  std::vector<std::uint32_t> tags;  // pool ids of the tweet's hashtags
  bool food = false;                // tags intersect the food keyword set
};

Real score(std::span<const Real> tweet_emb, std::uint32_t tag, const EncoderParams& params);
Real binary_score(std::span<const Real> tweet_emb, const EncoderParams& params);

struct NegativeDraw {
  std::uint32_t tag = 0;
  Real score = 0;
};

struct NegativeSelection {
  NegativeDraw negative;
  Real loss = 0;
  std::size_t draws = 0;
};

// Negative sampling loop: draw t-, and redraw while
// f(w,t-) <= m + f(w,t+) and the iteration counter is <= M. The hinge is
// evaluated on the last draw.
NegativeSelection select_negative(Real positive_score, Real margin, std::size_t max_iters,
                                  const std::function<NegativeDraw()>& draw);

struct StepResult {
  Real loss = 0;
  bool skipped = false;  // no pooled hashtag on the record
  bool updated = false;
  std::uint32_t positive = 0;
  std::uint32_t negative = 0;
  std::size_t draws = 0;
};

// Loss and gradient of one ranking step; nothing is accumulated when the
// hinge is inactive.
StepResult warp_gradient(const EncodedTweet& tweet, const EncoderParams& params, Rng& rng,
                         Gradients& grads);
StepResult warp_step(const EncodedTweet& tweet, EncoderParams& params, Optimizer& opt, Rng& rng);

// Hinge max(0, m - y s) with s = e_conv(w) . c and y = +1 for food.
StepResult binary_gradient(const EncodedTweet& tweet, const EncoderParams& params, Gradients& grads);
StepResult binary_step(const EncodedTweet& tweet, EncoderParams& params, Optimizer& opt);

struct TrainConfig {
  std::size_t epochs = 2;
  double learning_rate = 0.05;
  OptimizerKind optimizer = OptimizerKind::adagrad;
  std::size_t batch_size = 1;
  std::uint64_t seed = 7;
  std::size_t threads = 1;

  void validate() const;
};

struct TrainReport {
  std::size_t admitted = 0;
  std::size_t updates = 0;
  std::vector<double> epoch_loss;  // mean loss per admitted record
};

// Records without pooled hashtags are not admitted. Each epoch visits the
// admitted records in a seeded order; records are grouped into batches
// whose gradients are reduced in record order, so results do not depend
// on the thread count.
EncoderParams train(EncoderParams init, std::span<const EncodedTweet> data, const TrainConfig& config,
                    TrainReport* report = nullptr,
                    const std::function<void(std::size_t epoch, double loss)>& on_epoch = {});

// Top-k pool ids by score, descending; ties go to the lower id.
std::vector<std::uint32_t> rank_hashtags(std::span<const Real> tweet_emb, const EncoderParams& params,
                                         std::size_t k);

// warp models: top-k ranked hashtags intersect keyword_tags; binary
// models: binary score > 0.
bool classify_food(std::span<const Real> tweet_emb, const EncoderParams& params,
                   std::span<const std::uint32_t> keyword_tags, std::size_t k_top);

struct DataSplit {
  std::vector<std::size_t> train, valid, test;
};

// Seeded split of n items; the valid and test parts take round(n * frac)
// items each.
DataSplit split_indices(std::size_t n, std::uint64_t seed, double valid_frac, double test_frac);

}  // namespace tagsurv::tagspace
