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

#include "tagsurv/tagspace.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <map>
#include <numeric>
#include <ostream>
#include <sstream>
#include <thread>

#include "tagsurv/error.hpp"

namespace tagsurv::tagspace {

std::string to_string(Objective o) { return o == Objective::warp ? "warp" : "binary"; }

Objective parse_objective(const std::string& s) {
  if (s == "warp") return Objective::warp;
  if (s == "binary") return Objective::binary;
  throw ValidationError("objective must be 'warp' or 'binary', got '" + s + "'");
}

std::string to_string(OptimizerKind o) { return o == OptimizerKind::sgd ? "sgd" : "adagrad"; }

OptimizerKind parse_optimizer(const std::string& s) {
  if (s == "sgd") return OptimizerKind::sgd;
  if (s == "adagrad") return OptimizerKind::adagrad;
  throw ValidationError("optimizer must be 'sgd' or 'adagrad', got '" + s + "'");
}

void Hyper::validate() const {
  if (dim < 1 || max_len < 1 || window < 1 || hidden < 1)
    throw ValidationError("model dimensions d, l, K, H must be positive");
  if (!(margin > 0) || !std::isfinite(margin)) throw ValidationError("margin m must be > 0");
  if (max_neg_iters < 1) throw ValidationError("max negative iterations M must be >= 1");
}

void TrainConfig::validate() const {
  if (!(learning_rate > 0) || !std::isfinite(learning_rate))
    throw ValidationError("learning rate must be > 0");
  if (batch_size < 1) throw ValidationError("batch size must be >= 1");
  if (threads < 1) throw ValidationError("threads must be >= 1");
}

EncoderParams EncoderParams::init(const Hyper& hyper, std::size_t table_rows, std::size_t tag_row_offset,
                                  std::size_t pool_size, std::uint64_t seed) {
  hyper.validate();
  if (tag_row_offset + pool_size > table_rows)
    throw ValidationError("hashtag rows exceed the embedding table");
  Rng rng(seed);
  const double a = 1.0 / std::sqrt(static_cast<double>(hyper.dim));
  auto uniform = [&](Matrix& m) {
    for (auto& v : m.values()) v = rng.uniform(-a, a);
  };
  EncoderParams p;
  p.hyper = hyper;
  p.word_table = Matrix(table_rows, hyper.dim);
  p.conv_weights = Matrix(hyper.window * hyper.dim, hyper.hidden);
  p.conv_bias.assign(hyper.hidden, 0.0);
  p.proj_weights = Matrix(hyper.hidden, hyper.dim);
  p.proj_bias.assign(hyper.dim, 0.0);
  p.class_vector.assign(hyper.dim, 0.0);
  p.tag_row_offset = tag_row_offset;
  p.pool_size = pool_size;
  uniform(p.word_table);
  uniform(p.conv_weights);
  uniform(p.proj_weights);
  return p;
}

std::span<const Real> EncoderParams::tag_row(std::uint32_t tag) const {
  if (tag >= pool_size) throw ValidationError("unknown hashtag id " + std::to_string(tag));
  return word_table.row(tag_row_offset + tag);
}

bool EncoderParams::all_finite() const {
  return word_table.all_finite() && conv_weights.all_finite() && proj_weights.all_finite() &&
         numeric::all_finite(conv_bias) && numeric::all_finite(proj_bias) &&
         numeric::all_finite(class_vector);
}

namespace {

std::string fmt(double v) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

Matrix as_row(const Vector& v) { return Matrix(1, v.size(), v); }

}  // namespace

void EncoderParams::save(std::ostream& out) const {
  out << hyper.dim << ' ' << hyper.max_len << ' ' << hyper.window << ' ' << hyper.hidden << ' '
      << fmt(hyper.margin) << ' ' << hyper.max_neg_iters << ' ' << to_string(hyper.objective) << '\n';
  auto section = [&](const char* name, const Matrix& m) {
    out << name << '\n';
    numeric::write_matrix(out, m);
  };
  section("tag_range", Matrix(1, 2, {static_cast<Real>(tag_row_offset), static_cast<Real>(pool_size)}));
  section("word_table", word_table);
  section("conv_weights", conv_weights);
  section("conv_bias", as_row(conv_bias));
  section("proj_weights", proj_weights);
  section("proj_bias", as_row(proj_bias));
  section("class_vector", as_row(class_vector));
}

EncoderParams EncoderParams::load(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw ValidationError("checkpoint: missing header");
  EncoderParams p;
  {
    std::istringstream hdr(line);
    std::string objective;
    if (!(hdr >> p.hyper.dim >> p.hyper.max_len >> p.hyper.window >> p.hyper.hidden >> p.hyper.margin >>
          p.hyper.max_neg_iters >> objective))
      throw ValidationError("checkpoint: header must be 'd l K H m M objective'");
    p.hyper.objective = parse_objective(objective);
    p.hyper.validate();
  }
  std::map<std::string, Matrix> sections;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    sections[line] = numeric::read_matrix(in);
  }
  auto take = [&](const char* name) -> Matrix& {
    auto it = sections.find(name);
    if (it == sections.end()) throw ValidationError(std::string("checkpoint: missing section '") + name + "'");
    return it->second;
  };
  auto vec = [&](const char* name, std::size_t len) {
    Matrix& m = take(name);
    if (m.rows() != 1 || m.cols() != len)
      throw ValidationError(std::string("checkpoint: section '") + name + "' has wrong shape");
    return Vector(m.values().begin(), m.values().end());
  };
  const auto& h = p.hyper;
  auto range = vec("tag_range", 2);
  p.tag_row_offset = static_cast<std::size_t>(range[0]);
  p.pool_size = static_cast<std::size_t>(range[1]);
  p.word_table = take("word_table");
  p.conv_weights = take("conv_weights");
  p.proj_weights = take("proj_weights");
  p.conv_bias = vec("conv_bias", h.hidden);
  p.proj_bias = vec("proj_bias", h.dim);
  p.class_vector = vec("class_vector", h.dim);
  if (p.word_table.cols() != h.dim || p.tag_row_offset + p.pool_size > p.word_table.rows())
    throw ValidationError("checkpoint: section 'word_table' has wrong shape");
  if (p.conv_weights.rows() != h.window * h.dim || p.conv_weights.cols() != h.hidden)
    throw ValidationError("checkpoint: section 'conv_weights' has wrong shape");
  if (p.proj_weights.rows() != h.hidden || p.proj_weights.cols() != h.dim)
    throw ValidationError("checkpoint: section 'proj_weights' has wrong shape");
  return p;
}

EncodeTrace encode_traced(std::span<const std::int32_t> ids, const EncoderParams& params) {
  std::size_t n = ids.size();
  while (n > 0 && ids[n - 1] == numeric::kPadId) --n;
  if (n == 0) throw ValidationError("empty tweet");
  EncodeTrace t;
  t.ids.assign(ids.begin(), ids.begin() + static_cast<std::ptrdiff_t>(n));
  std::vector<bool> mask(n);
  for (std::size_t i = 0; i < n; ++i) mask[i] = t.ids[i] != numeric::kPadId;
  t.embedded = numeric::embed_lookup(t.ids, params.word_table);
  t.hidden = numeric::tanh_map(numeric::conv1d(t.embedded, params.conv_weights, params.conv_bias));
  t.pooled = numeric::maxpool_time(t.hidden, mask);
  t.output = numeric::tanh_map(numeric::affine(t.pooled.values, params.proj_weights, params.proj_bias));
  return t;
}

Vector encode(std::span<const std::int32_t> ids, const EncoderParams& params) {
  return encode_traced(ids, params).output;
}

Gradients::Gradients(const EncoderParams& params)
    : word_table(params.word_table.cols()),
      conv_weights(params.conv_weights.rows(), params.conv_weights.cols()),
      conv_bias(params.conv_bias.size(), 0.0),
      proj_weights(params.proj_weights.rows(), params.proj_weights.cols()),
      proj_bias(params.proj_bias.size(), 0.0),
      class_vector(params.class_vector.size(), 0.0) {}

namespace {

void add_into(std::span<Real> dst, std::span<const Real> src) {
  for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += src[i];
}

}  // namespace

void Gradients::merge(const Gradients& other) {
  word_table.merge(other.word_table);
  add_into(conv_weights.values(), other.conv_weights.values());
  add_into(conv_bias, other.conv_bias);
  add_into(proj_weights.values(), other.proj_weights.values());
  add_into(proj_bias, other.proj_bias);
  add_into(class_vector, other.class_vector);
  class_touched = class_touched || other.class_touched;
}

void encode_backward(const EncodeTrace& trace, const EncoderParams& params,
                     std::span<const Real> grad_output, Gradients& grads) {
  const Vector g_proj = numeric::tanh_backward(trace.output, grad_output);
  auto ag = numeric::affine_backward(trace.pooled.values, params.proj_weights, g_proj);
  add_into(grads.proj_weights.values(), ag.weights.values());
  add_into(grads.proj_bias, ag.bias);
  const Matrix g_hidden = numeric::maxpool_backward(trace.pooled, trace.hidden.rows(), ag.x);
  const Matrix g_conv = numeric::tanh_backward(trace.hidden, g_hidden);
  auto cg = numeric::conv1d_backward(trace.embedded, params.conv_weights, g_conv);
  add_into(grads.conv_weights.values(), cg.weights.values());
  add_into(grads.conv_bias, cg.bias);
  numeric::embed_lookup_backward(trace.ids, cg.input, grads.word_table);
}

Optimizer::Optimizer(OptimizerKind kind, double learning_rate, const EncoderParams& params)
    : kind_(kind), lr_(learning_rate) {
  if (kind_ == OptimizerKind::adagrad) {
    acc_table_ = Matrix(params.word_table.rows(), params.word_table.cols());
    acc_conv_w_ = Matrix(params.conv_weights.rows(), params.conv_weights.cols());
    acc_proj_w_ = Matrix(params.proj_weights.rows(), params.proj_weights.cols());
    acc_conv_b_.assign(params.conv_bias.size(), 0.0);
    acc_proj_b_.assign(params.proj_bias.size(), 0.0);
    acc_class_.assign(params.class_vector.size(), 0.0);
  }
}

void Optimizer::apply(EncoderParams& params, const Gradients& grads) {
  constexpr Real kEps = 1e-10;
  auto update = [&](std::span<Real> p, std::span<const Real> g, std::span<Real> acc) {
    if (kind_ == OptimizerKind::sgd) {
      for (std::size_t i = 0; i < p.size(); ++i) p[i] -= lr_ * g[i];
      return;
    }
    for (std::size_t i = 0; i < p.size(); ++i) {
      if (g[i] == 0.0) continue;
      acc[i] += g[i] * g[i];
      p[i] -= lr_ * g[i] / (std::sqrt(acc[i]) + kEps);
    }
  };
  const bool ada = kind_ == OptimizerKind::adagrad;
  for (const auto& [r, g] : grads.word_table.rows())
    update(params.word_table.row(r), g, ada ? acc_table_.row(r) : std::span<Real>{});
  update(params.conv_weights.values(), grads.conv_weights.values(), acc_conv_w_.values());
  update(params.conv_bias, grads.conv_bias, acc_conv_b_);
  update(params.proj_weights.values(), grads.proj_weights.values(), acc_proj_w_.values());
  update(params.proj_bias, grads.proj_bias, acc_proj_b_);
  if (grads.class_touched) update(params.class_vector, grads.class_vector, acc_class_);
}

Real score(std::span<const Real> tweet_emb, std::uint32_t tag, const EncoderParams& params) {
  return numeric::dot(tweet_emb, params.tag_row(tag));
}

Real binary_score(std::span<const Real> tweet_emb, const EncoderParams& params) {
  return numeric::dot(tweet_emb, params.class_vector);
}

NegativeSelection select_negative(Real positive_score, Real margin, std::size_t max_iters,
                                  const std::function<NegativeDraw()>& draw) {
  NegativeSelection sel;
  sel.negative = draw();
  sel.draws = 1;
  std::size_t i = 0;
  while (sel.negative.score <= margin + positive_score && i <= max_iters) {
    sel.negative = draw();
    ++sel.draws;
    ++i;
  }
  sel.loss = std::max<Real>(0.0, margin - positive_score + sel.negative.score);
  return sel;
}

StepResult warp_gradient(const EncodedTweet& tweet, const EncoderParams& params, Rng& rng,
                         Gradients& grads) {
  StepResult res;
  if (tweet.tags.empty()) {
    res.skipped = true;
    return res;
  }
  const std::size_t pool = params.pool_size;
  std::vector<bool> positive(pool, false);
  std::size_t n_pos = 0;
  for (auto t : tweet.tags) {
    if (t >= pool) throw ValidationError("unknown hashtag id " + std::to_string(t));
    if (!positive[t]) ++n_pos;
    positive[t] = true;
  }
  if (pool <= 1 || n_pos >= pool) throw ValidationError("no negatives");

  const EncodeTrace trace = encode_traced(tweet.ids, params);
  const std::uint32_t pos = tweet.tags[rng.uniform_index(tweet.tags.size())];
  const Real f_pos = score(trace.output, pos, params);
  auto draw = [&]() -> NegativeDraw {
    std::uint32_t t;
    do {
      t = static_cast<std::uint32_t>(rng.uniform_index(pool));
    } while (positive[t]);
    return {t, score(trace.output, t, params)};
  };
  const auto sel = select_negative(f_pos, params.hyper.margin, params.hyper.max_neg_iters, draw);
  res.loss = sel.loss;
  res.positive = pos;
  res.negative = sel.negative.tag;
  res.draws = sel.draws;
  if (sel.loss <= 0) return res;

  // loss = m - e.e(t+) + e.e(t-)
  const auto e_pos = params.tag_row(pos);
  const auto e_neg = params.tag_row(sel.negative.tag);
  Vector g_out(e_pos.size());
  for (std::size_t i = 0; i < g_out.size(); ++i) g_out[i] = e_neg[i] - e_pos[i];
  Vector neg_out(trace.output.size());
  std::transform(trace.output.begin(), trace.output.end(), neg_out.begin(), [](Real v) { return -v; });
  grads.word_table.add(params.tag_row_offset + pos, neg_out);
  grads.word_table.add(params.tag_row_offset + sel.negative.tag, trace.output);
  encode_backward(trace, params, g_out, grads);
  res.updated = true;
  return res;
}

StepResult warp_step(const EncodedTweet& tweet, EncoderParams& params, Optimizer& opt, Rng& rng) {
  Gradients g(params);
  auto res = warp_gradient(tweet, params, rng, g);
  if (res.updated) opt.apply(params, g);
  return res;
}

StepResult binary_gradient(const EncodedTweet& tweet, const EncoderParams& params, Gradients& grads) {
  StepResult res;
  const EncodeTrace trace = encode_traced(tweet.ids, params);
  const Real y = tweet.food ? 1.0 : -1.0;
  const Real s = binary_score(trace.output, params);
  res.loss = std::max<Real>(0.0, params.hyper.margin - y * s);
  if (res.loss <= 0) return res;
  Vector g_out(params.class_vector.size());
  for (std::size_t i = 0; i < g_out.size(); ++i) {
    g_out[i] = -y * params.class_vector[i];
    grads.class_vector[i] += -y * trace.output[i];
  }
  grads.class_touched = true;
  encode_backward(trace, params, g_out, grads);
  res.updated = true;
  return res;
}

StepResult binary_step(const EncodedTweet& tweet, EncoderParams& params, Optimizer& opt) {
  Gradients g(params);
  auto res = binary_gradient(tweet, params, g);
  if (res.updated) opt.apply(params, g);
  return res;
}

EncoderParams train(EncoderParams params, std::span<const EncodedTweet> data, const TrainConfig& config,
                    TrainReport* report, const std::function<void(std::size_t, double)>& on_epoch) {
  config.validate();
  std::vector<std::size_t> admitted;
  for (std::size_t i = 0; i < data.size(); ++i)
    if (!data[i].tags.empty()) admitted.push_back(i);
  if (admitted.empty()) throw ValidationError("no training tweets carry a pooled hashtag");

  TrainReport local;
  TrainReport& rep = report ? *report : local;
  rep = TrainReport{};
  rep.admitted = admitted.size();

  Optimizer opt(config.optimizer, config.learning_rate, params);
  const bool warp = params.hyper.objective == Objective::warp;

  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    std::vector<std::size_t> order = admitted;
    Rng(derive_seed(config.seed, 0x5eed, epoch)).shuffle(order.begin(), order.end());
    double total = 0;
    for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
      const std::size_t count = std::min(config.batch_size, order.size() - start);
      std::vector<Gradients> grads(count, Gradients(params));
      std::vector<StepResult> results(count);
      auto work = [&](std::size_t j) {
        const std::size_t idx = order[start + j];
        if (warp) {
          Rng rng(derive_seed(config.seed, epoch + 1, idx));
          results[j] = warp_gradient(data[idx], params, rng, grads[j]);
        } else {
          results[j] = binary_gradient(data[idx], params, grads[j]);
        }
      };
      const std::size_t nthreads = std::min(config.threads, count);
      if (nthreads <= 1) {
        for (std::size_t j = 0; j < count; ++j) work(j);
      } else {
        std::vector<std::thread> pool;
        for (std::size_t t = 0; t < nthreads; ++t)
          pool.emplace_back([&, t] {
            for (std::size_t j = t; j < count; j += nthreads) work(j);
          });
        for (auto& th : pool) th.join();
      }
      bool any = false;
      for (std::size_t j = 0; j < count; ++j) {
        total += results[j].loss;
        any = any || results[j].updated;
      }
      if (!any) continue;
      for (std::size_t j = 1; j < count; ++j) grads[0].merge(grads[j]);
      opt.apply(params, grads[0]);
      ++rep.updates;
    }
    const double mean = total / static_cast<double>(order.size());
    rep.epoch_loss.push_back(mean);
    if (on_epoch) on_epoch(epoch, mean);
  }
  if (!params.all_finite()) throw ValidationError("training diverged: non-finite parameters");
  return params;
}

std::vector<std::uint32_t> rank_hashtags(std::span<const Real> tweet_emb, const EncoderParams& params,
                                         std::size_t k) {
  const std::size_t pool = params.pool_size;
  Vector scores(pool);
  for (std::uint32_t t = 0; t < pool; ++t) scores[t] = score(tweet_emb, t, params);
  std::vector<std::uint32_t> ids(pool);
  std::iota(ids.begin(), ids.end(), 0u);
  k = std::min(k, pool);
  std::partial_sort(ids.begin(), ids.begin() + static_cast<std::ptrdiff_t>(k), ids.end(),
                    [&](std::uint32_t a, std::uint32_t b) {
                      return scores[a] != scores[b] ? scores[a] > scores[b] : a < b;
                    });
  ids.resize(k);
  return ids;
}

bool classify_food(std::span<const Real> tweet_emb, const EncoderParams& params,
                   std::span<const std::uint32_t> keyword_tags, std::size_t k_top) {
  if (params.hyper.objective == Objective::binary) return binary_score(tweet_emb, params) > 0;
  const auto top = rank_hashtags(tweet_emb, params, k_top);
  return std::any_of(top.begin(), top.end(), [&](std::uint32_t t) {
    return std::find(keyword_tags.begin(), keyword_tags.end(), t) != keyword_tags.end();
  });
}

DataSplit split_indices(std::size_t n, std::uint64_t seed, double valid_frac, double test_frac) {
  if (valid_frac < 0 || test_frac < 0 || valid_frac + test_frac > 1)
    throw ValidationError("split fractions must be non-negative and sum to at most 1");
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  Rng(seed).shuffle(idx.begin(), idx.end());
  const auto nv = static_cast<std::size_t>(std::llround(valid_frac * static_cast<double>(n)));
  const auto nt = std::min(n - nv, static_cast<std::size_t>(std::llround(test_frac * static_cast<double>(n))));
  DataSplit s;
  s.valid.assign(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(nv));
  s.test.assign(idx.begin() + static_cast<std::ptrdiff_t>(nv), idx.begin() + static_cast<std::ptrdiff_t>(nv + nt));
  s.train.assign(idx.begin() + static_cast<std::ptrdiff_t>(nv + nt), idx.end());
  std::sort(s.train.begin(), s.train.end());
  std::sort(s.valid.begin(), s.valid.end());
  std::sort(s.test.begin(), s.test.end());
  return s;
}

}  // namespace tagsurv::tagspace
