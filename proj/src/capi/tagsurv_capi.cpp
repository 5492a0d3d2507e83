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

#include "tagsurv/tagsurv.h"

#include <cstring>
#include <fstream>
#include <memory>
#include <new>
#include <streambuf>
#include <string>

#include "tagsurv/config.hpp"
#include "tagsurv/corpus.hpp"
#include "tagsurv/error.hpp"
#include "tagsurv/eval.hpp"
#include "tagsurv/pipeline.hpp"
#include "tagsurv/tagspace.hpp"

struct tagsurv_config {
  tagsurv::pipeline::PipelineConfig value;
};

struct tagsurv_vocab {
  std::shared_ptr<const tagsurv::corpus::Vocabulary> value;
};

struct tagsurv_model {
  std::shared_ptr<const tagsurv::corpus::Vocabulary> vocab;
  tagsurv::tagspace::EncoderParams params;
};

namespace {

thread_local std::string g_last_error;

tagsurv_status fail(tagsurv_status s, std::string message) {
  g_last_error = std::move(message);
  return s;
}

template <class Fn>
tagsurv_status guarded(Fn&& fn) {
  try {
    fn();
    g_last_error.clear();
    return TAGSURV_OK;
  } catch (const tagsurv::ValidationError& e) {
    return fail(TAGSURV_ERR_VALIDATION, e.what());
  } catch (const tagsurv::IoError& e) {
    return fail(TAGSURV_ERR_IO, e.what());
  } catch (const std::bad_alloc&) {
    return fail(TAGSURV_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(TAGSURV_ERR_INTERNAL, e.what());
  }
}

void require(const void* p, const char* what) {
  if (!p) throw tagsurv::ValidationError(std::string(what) + " is null");
}

void copy_out(const std::string& s, char* buf, std::size_t cap, std::size_t* length) {
  if (length) *length = s.size();
  if (buf && cap > 0) {
    const std::size_t n = std::min(s.size(), cap - 1);
    std::memcpy(buf, s.data(), n);
    buf[n] = '\0';
  }
}

// Forwards complete lines to a C callback.
class LineBuf : public std::streambuf {
 public:
  LineBuf(tagsurv_log_fn fn, void* user) : fn_(fn), user_(user) {}
  ~LineBuf() override { flush_line(); }

 protected:
  int_type overflow(int_type ch) override {
    if (traits_type::eq_int_type(ch, traits_type::eof())) return traits_type::not_eof(ch);
    if (ch == '\n')
      flush_line();
    else
      line_ += static_cast<char>(ch);
    return ch;
  }

 private:
  void flush_line() {
    if (fn_ && !line_.empty()) fn_(line_.c_str(), user_);
    line_.clear();
  }
  tagsurv_log_fn fn_;
  void* user_;
  std::string line_;
};

std::vector<std::int32_t> encode_text(const tagsurv_model* m, const char* text) {
  require(text, "text");
  const auto tokens = tagsurv::corpus::normalize_text(text);
  return tagsurv::corpus::encode_tokens(tokens, *m->vocab, m->params.hyper.max_len);
}

}  // namespace

extern "C" {

const char* tagsurv_version(void) { return "0.1.0"; }

const char* tagsurv_last_error(void) { return g_last_error.c_str(); }

tagsurv_status tagsurv_config_create(tagsurv_config** out) {
  return guarded([&] {
    require(out, "output handle");
    *out = new tagsurv_config();
  });
}

void tagsurv_config_destroy(tagsurv_config* config) { delete config; }

tagsurv_status tagsurv_config_load(tagsurv_config* config, const char* path) {
  return guarded([&] {
    require(config, "config");
    require(path, "path");
    config->value.load_file(path);
  });
}

tagsurv_status tagsurv_config_set(tagsurv_config* config, const char* key, const char* value) {
  return guarded([&] {
    require(config, "config");
    require(key, "key");
    require(value, "value");
    config->value.set(key, value);
  });
}

tagsurv_status tagsurv_config_set_base_dir(tagsurv_config* config, const char* dir) {
  return guarded([&] {
    require(config, "config");
    require(dir, "dir");
    config->value.set_base_dir(dir);
  });
}

tagsurv_status tagsurv_config_get(const tagsurv_config* config, const char* key, char* buf, size_t cap,
                                  size_t* length) {
  return guarded([&] {
    require(config, "config");
    require(key, "key");
    copy_out(config->value.get(key), buf, cap, length);
  });
}

size_t tagsurv_config_key_count(void) { return tagsurv::pipeline::config_keys().size(); }

tagsurv_status tagsurv_config_key_info(size_t index, tagsurv_key_info* out) {
  return guarded([&] {
    require(out, "output");
    const auto keys = tagsurv::pipeline::config_keys();
    if (index >= keys.size()) throw tagsurv::ValidationError("index error: key " + std::to_string(index));
    const auto& k = keys[index];
    out->name = k.name.data();
    out->default_value = k.default_value.data();
    out->help = k.help.data();
    out->kind = static_cast<tagsurv_key_kind>(k.kind);
    out->stages = k.stages;
  });
}

size_t tagsurv_stage_count(void) { return tagsurv::pipeline::stage_table().size(); }

tagsurv_status tagsurv_stage_info_at(size_t index, tagsurv_stage_info* out) {
  return guarded([&] {
    require(out, "output");
    const auto stages = tagsurv::pipeline::stage_table();
    if (index >= stages.size()) throw tagsurv::ValidationError("index error: stage " + std::to_string(index));
    out->name = stages[index].name.data();
    out->help = stages[index].help.data();
    out->bit = stages[index].bit;
  });
}

tagsurv_status tagsurv_run_stage(const tagsurv_config* config, const char* stage, tagsurv_log_fn log, void* user) {
  return guarded([&] {
    require(config, "config");
    require(stage, "stage");
    LineBuf buf(log, user);
    std::ostream os(&buf);
    tagsurv::pipeline::run_stage(stage, config->value, os);
  });
}

tagsurv_status tagsurv_normalize(const char* text, char* buf, size_t cap, size_t* length) {
  return guarded([&] {
    require(text, "text");
    const auto tokens = tagsurv::corpus::normalize_text(text);
    copy_out(tagsurv::corpus::join_tokens(tokens), buf, cap, length);
  });
}

tagsurv_status tagsurv_vocab_load(const char* path, tagsurv_vocab** out) {
  return guarded([&] {
    require(path, "path");
    require(out, "output handle");
    std::ifstream in(path, std::ios::binary);
    if (!in) throw tagsurv::IoError(std::string("cannot read vocabulary '") + path + "'");
    auto v = std::make_shared<const tagsurv::corpus::Vocabulary>(tagsurv::corpus::Vocabulary::load(in));
    *out = new tagsurv_vocab{std::move(v)};
  });
}

void tagsurv_vocab_destroy(tagsurv_vocab* vocab) { delete vocab; }

size_t tagsurv_vocab_num_words(const tagsurv_vocab* vocab) { return vocab ? vocab->value->num_words() : 0; }

size_t tagsurv_vocab_pool_size(const tagsurv_vocab* vocab) { return vocab ? vocab->value->pool_size() : 0; }

tagsurv_status tagsurv_vocab_hashtag(const tagsurv_vocab* vocab, size_t id, const char** out) {
  return guarded([&] {
    require(vocab, "vocab");
    require(out, "output");
    if (id >= vocab->value->pool_size()) throw tagsurv::ValidationError("index error: hashtag " + std::to_string(id));
    *out = vocab->value->hashtag(id).c_str();
  });
}

tagsurv_status tagsurv_vocab_hashtag_id(const tagsurv_vocab* vocab, const char* hashtag, uint32_t* out) {
  return guarded([&] {
    require(vocab, "vocab");
    require(hashtag, "hashtag");
    require(out, "output");
    auto id = vocab->value->hashtag_id(hashtag);
    if (!id) throw tagsurv::ValidationError(std::string("hashtag '") + hashtag + "' is not in the pool");
    *out = *id;
  });
}

tagsurv_status tagsurv_model_load(const char* checkpoint, const tagsurv_vocab* vocab, tagsurv_model** out) {
  return guarded([&] {
    require(checkpoint, "checkpoint");
    require(vocab, "vocab");
    require(out, "output handle");
    std::ifstream in(checkpoint, std::ios::binary);
    if (!in) throw tagsurv::IoError(std::string("cannot read checkpoint '") + checkpoint + "'");
    auto params = tagsurv::tagspace::EncoderParams::load(in);
    const auto& v = *vocab->value;
    if (params.word_table.rows() != v.table_rows() || params.pool_size != v.pool_size() ||
        params.tag_row_offset != v.tag_row_offset())
      throw tagsurv::ValidationError("checkpoint does not match the vocabulary");
    *out = new tagsurv_model{vocab->value, std::move(params)};
  });
}

void tagsurv_model_destroy(tagsurv_model* model) { delete model; }

size_t tagsurv_model_dim(const tagsurv_model* model) { return model ? model->params.hyper.dim : 0; }

tagsurv_status tagsurv_model_embed(const tagsurv_model* model, const char* text, double* out) {
  return guarded([&] {
    require(model, "model");
    require(out, "output");
    const auto emb = tagsurv::tagspace::encode(encode_text(model, text), model->params);
    std::copy(emb.begin(), emb.end(), out);
  });
}

tagsurv_status tagsurv_model_rank(const tagsurv_model* model, const char* text, size_t k, uint32_t* ids,
                                  size_t* count) {
  return guarded([&] {
    require(model, "model");
    require(count, "count");
    if (k > 0) require(ids, "ids");
    const auto emb = tagsurv::tagspace::encode(encode_text(model, text), model->params);
    const auto ranked = tagsurv::tagspace::rank_hashtags(emb, model->params, k);
    std::copy(ranked.begin(), ranked.end(), ids);
    *count = ranked.size();
  });
}

tagsurv_status tagsurv_mae(const double* pred, const double* actual, size_t n, double* out) {
  return guarded([&] {
    require(out, "output");
    if (n > 0) {
      require(pred, "pred");
      require(actual, "actual");
    }
    *out = tagsurv::eval::mae({pred, n}, {actual, n});
  });
}

tagsurv_status tagsurv_pearson(const double* a, const double* b, size_t n, double* out) {
  return guarded([&] {
    require(out, "output");
    if (n > 0) {
      require(a, "a");
      require(b, "b");
    }
    *out = tagsurv::eval::pearson({a, n}, {b, n});
  });
}

tagsurv_status tagsurv_spearman(const double* a, const double* b, size_t n, double* out) {
  return guarded([&] {
    require(out, "output");
    if (n > 0) {
      require(a, "a");
      require(b, "b");
    }
    *out = tagsurv::eval::spearman({a, n}, {b, n});
  });
}

}  // extern "C"
