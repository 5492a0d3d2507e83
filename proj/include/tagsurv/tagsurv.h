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

#ifndef TAGSURV_TAGSURV_H_
#define TAGSURV_TAGSURV_H_

/* C interface to the tagsurv library. Handles are opaque; every call
 * that can fail returns a tagsurv_status and leaves a one-line message
 * in tagsurv_last_error() for the calling thread. */

#include <stddef.h>
#include <stdint.h>

#if defined(TAGSURV_BUILDING_LIBRARY)
#define TAGSURV_API __attribute__((visibility("default")))
#else
#define TAGSURV_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum tagsurv_status {
  TAGSURV_OK = 0,
  TAGSURV_ERR_VALIDATION = 1,
  TAGSURV_ERR_IO = 2,
  TAGSURV_ERR_INTERNAL = 3
} tagsurv_status;

typedef enum tagsurv_key_kind {
  TAGSURV_KEY_PATH = 0,
  TAGSURV_KEY_INTEGER = 1,
  TAGSURV_KEY_REAL = 2,
  TAGSURV_KEY_TEXT = 3,
  TAGSURV_KEY_CHOICE = 4
} tagsurv_key_kind;

typedef struct tagsurv_config tagsurv_config;
typedef struct tagsurv_vocab tagsurv_vocab;
typedef struct tagsurv_model tagsurv_model;

/* Static description of a configuration key. Strings live for the
 * lifetime of the library. */
typedef struct tagsurv_key_info {
  const char* name;
  const char* default_value;
  const char* help;
  tagsurv_key_kind kind;
  unsigned stages; /* bit mask, see tagsurv_stage_info */
} tagsurv_key_info;

typedef struct tagsurv_stage_info {
  const char* name;
  const char* help;
  unsigned bit; /* 0 for the chained pipeline */
} tagsurv_stage_info;

/* Receives one log line at a time, without the trailing newline. */
typedef void (*tagsurv_log_fn)(const char* line, void* user);

TAGSURV_API const char* tagsurv_version(void);
TAGSURV_API const char* tagsurv_last_error(void);

/* Configuration */
TAGSURV_API tagsurv_status tagsurv_config_create(tagsurv_config** out);
TAGSURV_API void tagsurv_config_destroy(tagsurv_config* config);
TAGSURV_API tagsurv_status tagsurv_config_load(tagsurv_config* config, const char* path);
TAGSURV_API tagsurv_status tagsurv_config_set(tagsurv_config* config, const char* key, const char* value);
TAGSURV_API tagsurv_status tagsurv_config_set_base_dir(tagsurv_config* config, const char* dir);
/* Copies the value into buf (NUL-terminated, truncated to cap). The
 * full length without the terminator is stored in *length if given. */
TAGSURV_API tagsurv_status tagsurv_config_get(const tagsurv_config* config, const char* key, char* buf,
                                              size_t cap, size_t* length);
TAGSURV_API size_t tagsurv_config_key_count(void);
TAGSURV_API tagsurv_status tagsurv_config_key_info(size_t index, tagsurv_key_info* out);

/* Stages */
TAGSURV_API size_t tagsurv_stage_count(void);
TAGSURV_API tagsurv_status tagsurv_stage_info_at(size_t index, tagsurv_stage_info* out);
TAGSURV_API tagsurv_status tagsurv_run_stage(const tagsurv_config* config, const char* stage, tagsurv_log_fn log,
                                             void* user);

/* Text */
/* Normalised tokens joined by single spaces. */
TAGSURV_API tagsurv_status tagsurv_normalize(const char* text, char* buf, size_t cap, size_t* length);

/* Vocabulary and model */
TAGSURV_API tagsurv_status tagsurv_vocab_load(const char* path, tagsurv_vocab** out);
TAGSURV_API void tagsurv_vocab_destroy(tagsurv_vocab* vocab);
TAGSURV_API size_t tagsurv_vocab_num_words(const tagsurv_vocab* vocab);
TAGSURV_API size_t tagsurv_vocab_pool_size(const tagsurv_vocab* vocab);
/* The returned string stays valid until the handle is destroyed. */
TAGSURV_API tagsurv_status tagsurv_vocab_hashtag(const tagsurv_vocab* vocab, size_t id, const char** out);
TAGSURV_API tagsurv_status tagsurv_vocab_hashtag_id(const tagsurv_vocab* vocab, const char* hashtag, uint32_t* out);

TAGSURV_API tagsurv_status tagsurv_model_load(const char* checkpoint, const tagsurv_vocab* vocab,
                                              tagsurv_model** out);
TAGSURV_API void tagsurv_model_destroy(tagsurv_model* model);
TAGSURV_API size_t tagsurv_model_dim(const tagsurv_model* model);
/* Embeds raw text; out must hold tagsurv_model_dim() values. */
TAGSURV_API tagsurv_status tagsurv_model_embed(const tagsurv_model* model, const char* text, double* out);
/* Writes up to k hashtag ids, best first; *count receives how many. */
TAGSURV_API tagsurv_status tagsurv_model_rank(const tagsurv_model* model, const char* text, size_t k,
                                              uint32_t* ids, size_t* count);

/* Statistics */
TAGSURV_API tagsurv_status tagsurv_mae(const double* pred, const double* actual, size_t n, double* out);
TAGSURV_API tagsurv_status tagsurv_pearson(const double* a, const double* b, size_t n, double* out);
TAGSURV_API tagsurv_status tagsurv_spearman(const double* a, const double* b, size_t n, double* out);

#ifdef __cplusplus
}
#endif

#endif /* TAGSURV_TAGSURV_H_ */
