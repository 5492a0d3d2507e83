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


/* Exercises the shared library through its C interface only. */

#include <math.h>
#include <stdio.h>
#include <stdlib.h>
#include <string.h>
#include <sys/stat.h>

#include "tagsurv/tagsurv.h"

static int failures = 0;

#define EXPECT(cond)                                             \
  do {                                                           \
    if (!(cond)) {                                               \
      fprintf(stderr, "%s:%d: failed: %s\n", __FILE__, __LINE__, #cond); \
      ++failures;                                                \
    }                                                            \
  } while (0)

static void count_lines(const char* line, void* user) {
  (void)line;
  ++*(int*)user;
}

static void check_static_tables(void) {
  EXPECT(strlen(tagsurv_version()) > 0);
  EXPECT(tagsurv_stage_count() == 10);
  tagsurv_stage_info stage;
  EXPECT(tagsurv_stage_info_at(0, &stage) == TAGSURV_OK);
  EXPECT(strcmp(stage.name, "synth") == 0);
  EXPECT(tagsurv_stage_info_at(99, &stage) == TAGSURV_ERR_VALIDATION);
  EXPECT(tagsurv_config_key_count() > 40);
  tagsurv_key_info key;
  int saw_dim = 0;
  for (size_t i = 0; i < tagsurv_config_key_count(); ++i) {
    EXPECT(tagsurv_config_key_info(i, &key) == TAGSURV_OK);
    if (strcmp(key.name, "dim") == 0) saw_dim = key.kind == TAGSURV_KEY_INTEGER;
  }
  EXPECT(saw_dim);
}

static void check_config(void) {
  tagsurv_config* config = NULL;
  EXPECT(tagsurv_config_create(&config) == TAGSURV_OK);
  char buf[8];
  size_t length = 0;
  EXPECT(tagsurv_config_get(config, "objective", buf, sizeof buf, &length) == TAGSURV_OK);
  EXPECT(strcmp(buf, "warp") == 0 && length == 4);
  EXPECT(tagsurv_config_get(config, "pipeline_stages", buf, sizeof buf, &length) == TAGSURV_OK);
  EXPECT(strlen(buf) == sizeof buf - 1 && length > sizeof buf);
  EXPECT(tagsurv_config_set(config, "objective", "binary") == TAGSURV_OK);
  EXPECT(tagsurv_config_set(config, "objective", "softmax") == TAGSURV_ERR_VALIDATION);
  EXPECT(strstr(tagsurv_last_error(), "objective") != NULL);
  EXPECT(tagsurv_config_set(config, "no_such_key", "1") == TAGSURV_ERR_VALIDATION);
  EXPECT(tagsurv_config_load(config, "/nonexistent/tagsurv.conf") == TAGSURV_ERR_IO);
  EXPECT(tagsurv_run_stage(config, "deploy", NULL, NULL) == TAGSURV_ERR_VALIDATION);
  EXPECT(tagsurv_config_create(NULL) == TAGSURV_ERR_VALIDATION);
  tagsurv_config_destroy(config);
  tagsurv_config_destroy(NULL);
}

static void check_text_and_stats(void) {
  char buf[64];
  size_t length = 0;
  EXPECT(tagsurv_normalize("Check http://t.co @bob #Pizza2night!!", buf, sizeof buf, &length) == TAGSURV_OK);
  EXPECT(strcmp(buf, "check #pizza2night") == 0);
  const double pred[] = {1, 3}, actual[] = {2, 3};
  double v = 0;
  EXPECT(tagsurv_mae(pred, actual, 2, &v) == TAGSURV_OK && v == 0.5);
  const double a[] = {1, 2, 3, 4}, b[] = {2, 1, 4, 3}, flat[] = {1, 1, 1, 1};
  EXPECT(tagsurv_spearman(a, b, 4, &v) == TAGSURV_OK && fabs(v - 0.6) < 1e-15);
  EXPECT(tagsurv_pearson(a, a, 4, &v) == TAGSURV_OK && fabs(v - 1.0) < 1e-15);
  EXPECT(tagsurv_pearson(a, flat, 4, &v) == TAGSURV_ERR_VALIDATION);
  EXPECT(strstr(tagsurv_last_error(), "degenerate") != NULL);
}

static void check_small_pipeline(const char* dir) {
  char path[4096];
  snprintf(path, sizeof path, "%s/small.conf", dir);
  FILE* f = fopen(path, "w");
  EXPECT(f != NULL);
  if (!f) return;
  fputs("synth_regions = 16\nsynth_tweets_per_region = 150\ndim = 8\nhidden = 16\nmax_len = 16\n"
        "epochs = 1\ntrials = 5\n",
        f);
  fclose(f);

  tagsurv_config* config = NULL;
  EXPECT(tagsurv_config_create(&config) == TAGSURV_OK);
  EXPECT(tagsurv_config_load(config, path) == TAGSURV_OK);
  int lines = 0;
  const tagsurv_status status = tagsurv_run_stage(config, "pipeline", count_lines, &lines);
  if (status != TAGSURV_OK) fprintf(stderr, "pipeline: %s\n", tagsurv_last_error());
  EXPECT(status == TAGSURV_OK);
  EXPECT(lines > 9);

  snprintf(path, sizeof path, "%s/work/vocab.tsv", dir);
  tagsurv_vocab* vocab = NULL;
  EXPECT(tagsurv_vocab_load(path, &vocab) == TAGSURV_OK);
  EXPECT(tagsurv_vocab_num_words(vocab) > 10);
  EXPECT(tagsurv_vocab_pool_size(vocab) == 20);
  uint32_t pizza = 0;
  EXPECT(tagsurv_vocab_hashtag_id(vocab, "#pizza", &pizza) == TAGSURV_OK);
  const char* name = NULL;
  EXPECT(tagsurv_vocab_hashtag(vocab, pizza, &name) == TAGSURV_OK && strcmp(name, "#pizza") == 0);
  EXPECT(tagsurv_vocab_hashtag_id(vocab, "#nothing", &pizza) == TAGSURV_ERR_VALIDATION);

  snprintf(path, sizeof path, "%s/work/model.ckpt", dir);
  tagsurv_model* model = NULL;
  EXPECT(tagsurv_model_load(path, vocab, &model) == TAGSURV_OK);
  tagsurv_vocab_destroy(vocab);
  if (model) {
    EXPECT(tagsurv_model_dim(model) == 8);
    double e[8];
    EXPECT(tagsurv_model_embed(model, "cheesy pizza tonight", e) == TAGSURV_OK);
    for (int i = 0; i < 8; ++i) EXPECT(e[i] > -1.0 && e[i] < 1.0);
    uint32_t ids[30];
    size_t count = 0;
    EXPECT(tagsurv_model_rank(model, "cheesy pizza tonight", 30, ids, &count) == TAGSURV_OK);
    EXPECT(count == 20);
    for (size_t i = 0; i < count; ++i) EXPECT(ids[i] < 20);
    tagsurv_model_destroy(model);
  }
  EXPECT(tagsurv_model_load("/nonexistent/model.ckpt", NULL, &model) == TAGSURV_ERR_VALIDATION);
  tagsurv_config_destroy(config);
}

int main(int argc, char** argv) {
  if (argc != 2) {
    fprintf(stderr, "usage: %s WORK_DIR\n", argv[0]);
    return 2;
  }
  mkdir(argv[1], 0755);
  check_static_tables();
  check_config();
  check_text_and_stats();
  check_small_pipeline(argv[1]);
  if (failures) fprintf(stderr, "%d check(s) failed\n", failures);
  return failures ? 1 : 0;
}
