// Copyright 2026 The MI Observer Authors.
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

#ifndef MIOBS_MIOBS_H_
#define MIOBS_MIOBS_H_

/* C interface to the MI observer engine.
 *
 * Every call returns a miobs_status. On failure the message is available from
 * miobs_last_error() on the same thread until the next failing call. Strings
 * returned through char** outputs are owned by the caller and released with
 * miobs_string_free(). Handles are not thread-safe unless noted. */

#include <stddef.h>

#if defined(_WIN32)
#define MIOBS_API __declspec(dllexport)
#else
#define MIOBS_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum miobs_status {
  MIOBS_OK = 0,
  MIOBS_ERR_DIMENSION = 1,
  MIOBS_ERR_CONFIG = 2,
  MIOBS_ERR_CONTRACT = 3,
  MIOBS_ERR_PARSE = 4,
  MIOBS_ERR_IO = 5,
  MIOBS_ERR_TRAINING = 6,
  MIOBS_ERR_NOT_FOUND = 7,
  MIOBS_ERR_INVALID_ARGUMENT = 8,
  MIOBS_ERR_INTERNAL = 9
} miobs_status;

MIOBS_API const char* miobs_last_error(void);
MIOBS_API const char* miobs_status_name(miobs_status status);
MIOBS_API const char* miobs_version(void);
MIOBS_API void miobs_string_free(char* s);

/* ---- configuration ---- */

typedef struct miobs_config miobs_config;

/* Defaults: preset C_C, synthetic generator seed 7 with 200 sessions of 40. */
MIOBS_API miobs_status miobs_config_new(miobs_config** out);
/* Applies "key = value" lines from a file on top of the current values. */
MIOBS_API miobs_status miobs_config_apply_file(miobs_config* config, const char* path);
MIOBS_API miobs_status miobs_config_set(miobs_config* config, const char* key,
                                        const char* value);
MIOBS_API miobs_status miobs_config_to_json(const miobs_config* config, char** json);
MIOBS_API void miobs_config_free(miobs_config* config);

/* ---- data ---- */

/* Writes the seeded synthetic corpus as JSONL. */
MIOBS_API miobs_status miobs_gen_data(const miobs_config* config, const char* out_path);

/* ---- training ---- */

/* Trains on the train split of the corpus. Writes the checkpoint and, when
 * log_path is non-NULL, one JSON line per epoch. summary (optional) receives
 * {best_metric, best_epoch, epochs, stopped_early, test: <report>}. */
MIOBS_API miobs_status miobs_train(const miobs_config* config, const char* corpus_path,
                                   const char* checkpoint_path, const char* log_path,
                                   size_t k, char** summary);

/* ---- models ---- */

typedef struct miobs_model miobs_model;

/* A loaded model is immutable; concurrent calls on one handle are safe. */
MIOBS_API miobs_status miobs_model_load(const char* checkpoint_path, miobs_model** out);
MIOBS_API miobs_status miobs_model_info(const miobs_model* model, char** json);
MIOBS_API void miobs_model_free(miobs_model* model);

/* Evaluates the model's task on one split ("all", "train", "dev", "test") of
 * the corpus, as assigned by the checkpoint's split settings. Writes the
 * report when report_path is non-NULL. */
MIOBS_API miobs_status miobs_eval(const miobs_model* model, const char* corpus_path,
                                  const char* split, size_t k, const char* report_path,
                                  char** report);

/* Scores predict output against the gold labels in corpus_path. */
MIOBS_API miobs_status miobs_eval_predictions(const char* corpus_path,
                                              const char* predictions_path, size_t k,
                                              const char* report_path, char** report);

/* Writes one JSON line per window of the model's task. */
MIOBS_API miobs_status miobs_predict(const miobs_model* model, const char* corpus_path,
                                     size_t k, const char* out_path);

/* ---- ablation ---- */

/* grid: "window=0,1,4,8,16;word_attention=none,bidaf,gmgru". Writes a
 * markdown table to out_path (if non-NULL) and to table (if non-NULL). */
MIOBS_API miobs_status miobs_ablate(const miobs_config* config, const char* corpus_path,
                                    const char* grid, size_t k, size_t threads,
                                    const char* out_path, char** table);

/* ---- service ---- */

typedef struct miobs_server miobs_server;

typedef struct miobs_server_options {
  /* Checkpoint paths; NULL leaves that slot empty. */
  const char* client_categorize;
  const char* client_forecast;
  const char* therapist_categorize;
  const char* therapist_forecast;
  /* Append-only mutation log; NULL disables it. */
  const char* replay_log;
  /* A previous log to re-apply before serving; NULL skips it. */
  const char* replay_from;
} miobs_server_options;

MIOBS_API miobs_status miobs_server_new(const miobs_server_options* options,
                                        miobs_server** out);
/* Serves on a background thread. Port 0 picks a free port. */
MIOBS_API miobs_status miobs_server_start(miobs_server* server, const char* host, int port,
                                          int* bound_port);
MIOBS_API miobs_status miobs_server_stop(miobs_server* server);
MIOBS_API void miobs_server_free(miobs_server* server);

#ifdef __cplusplus
}
#endif

#endif /* MIOBS_MIOBS_H_ */
