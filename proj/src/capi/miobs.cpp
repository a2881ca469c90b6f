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

#include "miobs/miobs.h"

#include <cstdlib>
#include <cstring>
#include <fstream>
#include <memory>
#include <new>
#include <string>

#include "core/config.h"
#include "core/error.h"
#include "core/pipeline.h"
#include "core/train.h"
#include "service/http_server.h"
#include "service/observer.h"

struct miobs_config {
  miobs::RunConfig value;
};

struct miobs_model {
  miobs::LoadedCheckpoint checkpoint;
};

struct miobs_server {
  std::unique_ptr<miobs::Observer> observer;
  std::unique_ptr<miobs::HttpServer> http;
};

namespace {

thread_local std::string last_error;

miobs_status fail(miobs_status status, const std::string& message) {
  last_error = message;
  return status;
}

miobs_status status_of(miobs::ErrorCode code) {
  switch (code) {
    case miobs::ErrorCode::kDimension: return MIOBS_ERR_DIMENSION;
    case miobs::ErrorCode::kConfig: return MIOBS_ERR_CONFIG;
    case miobs::ErrorCode::kContract: return MIOBS_ERR_CONTRACT;
    case miobs::ErrorCode::kParse: return MIOBS_ERR_PARSE;
    case miobs::ErrorCode::kIo: return MIOBS_ERR_IO;
    case miobs::ErrorCode::kTraining: return MIOBS_ERR_TRAINING;
    case miobs::ErrorCode::kNotFound: return MIOBS_ERR_NOT_FOUND;
  }
  return MIOBS_ERR_INTERNAL;
}

template <typename F>
miobs_status guarded(F&& body) {
  try {
    body();
    return MIOBS_OK;
  } catch (const miobs::Error& e) {
    return fail(status_of(e.code()), e.what());
  } catch (const std::bad_alloc&) {
    return fail(MIOBS_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(MIOBS_ERR_INTERNAL, e.what());
  } catch (...) {
    return fail(MIOBS_ERR_INTERNAL, "unknown error");
  }
}

#define MIOBS_REQUIRE(ptr)                                                   \
  do {                                                                       \
    if ((ptr) == nullptr) return fail(MIOBS_ERR_INVALID_ARGUMENT, #ptr " is NULL"); \
  } while (0)

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (out == nullptr) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw miobs::IoError("cannot write '" + path + "'");
  out << content;
  if (!out) throw miobs::IoError("failed writing '" + path + "'");
}

}  // namespace

extern "C" {

const char* miobs_last_error(void) { return last_error.c_str(); }

const char* miobs_status_name(miobs_status status) {
  switch (status) {
    case MIOBS_OK: return "ok";
    case MIOBS_ERR_DIMENSION: return "dimension";
    case MIOBS_ERR_CONFIG: return "config";
    case MIOBS_ERR_CONTRACT: return "contract";
    case MIOBS_ERR_PARSE: return "parse";
    case MIOBS_ERR_IO: return "io";
    case MIOBS_ERR_TRAINING: return "training";
    case MIOBS_ERR_NOT_FOUND: return "not_found";
    case MIOBS_ERR_INVALID_ARGUMENT: return "invalid_argument";
    case MIOBS_ERR_INTERNAL: return "internal";
  }
  return "unknown";
}

const char* miobs_version(void) { return "1.0.0"; }

void miobs_string_free(char* s) { std::free(s); }

miobs_status miobs_config_new(miobs_config** out) {
  MIOBS_REQUIRE(out);
  return guarded([&] { *out = new miobs_config(); });
}

miobs_status miobs_config_apply_file(miobs_config* config, const char* path) {
  MIOBS_REQUIRE(config);
  MIOBS_REQUIRE(path);
  return guarded([&] {
    std::ifstream in(path);
    if (!in) throw miobs::IoError(std::string("cannot open config '") + path + "'");
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    miobs::apply_config(config->value, text, path);
  });
}

miobs_status miobs_config_set(miobs_config* config, const char* key, const char* value) {
  MIOBS_REQUIRE(config);
  MIOBS_REQUIRE(key);
  MIOBS_REQUIRE(value);
  return guarded([&] { config->value.set(key, value); });
}

miobs_status miobs_config_to_json(const miobs_config* config, char** json) {
  MIOBS_REQUIRE(config);
  MIOBS_REQUIRE(json);
  return guarded([&] { *json = dup_string(config->value.to_json().dump(2)); });
}

void miobs_config_free(miobs_config* config) { delete config; }

miobs_status miobs_gen_data(const miobs_config* config, const char* out_path) {
  MIOBS_REQUIRE(config);
  MIOBS_REQUIRE(out_path);
  return guarded([&] { miobs::save_corpus(miobs::gen_synthetic(config->value.synthetic), out_path); });
}

miobs_status miobs_train(const miobs_config* config, const char* corpus_path,
                         const char* checkpoint_path, const char* log_path, size_t k,
                         char** summary) {
  MIOBS_REQUIRE(config);
  MIOBS_REQUIRE(corpus_path);
  MIOBS_REQUIRE(checkpoint_path);
  return guarded([&] {
    const miobs::Corpus corpus = miobs::load_corpus(corpus_path);
    std::ofstream log;
    if (log_path != nullptr) {
      log.open(log_path, std::ios::binary | std::ios::trunc);
      if (!log) throw miobs::IoError(std::string("cannot write '") + log_path + "'");
    }
    miobs::TrainOutcome o = miobs::train_run(config->value, corpus, k, [&](const miobs::EpochLog& e) {
      if (log.is_open()) log << e.to_json().dump() << '\n' << std::flush;
    });
    miobs::save_checkpoint(*o.model, o.meta, checkpoint_path);
    if (summary != nullptr) {
      nlohmann::ordered_json j;
      j["best_metric"] = o.fit.best_metric;
      j["best_epoch"] = o.fit.best_epoch;
      j["epochs"] = o.fit.log.size();
      j["stopped_early"] = o.fit.stopped_early;
      j["test"] = o.test.to_json();
      *summary = dup_string(j.dump(2));
    }
  });
}

miobs_status miobs_model_load(const char* checkpoint_path, miobs_model** out) {
  MIOBS_REQUIRE(checkpoint_path);
  MIOBS_REQUIRE(out);
  return guarded([&] {
    auto m = std::make_unique<miobs_model>();
    m->checkpoint = miobs::load_checkpoint(checkpoint_path);
    *out = m.release();
  });
}

miobs_status miobs_model_info(const miobs_model* model, char** json) {
  MIOBS_REQUIRE(model);
  MIOBS_REQUIRE(json);
  return guarded([&] {
    const auto& meta = model->checkpoint.meta;
    nlohmann::ordered_json j;
    j["model"] = meta.model.to_json();
    j["train"] = meta.train.to_json();
    auto& tasks = j["tasks"] = nlohmann::ordered_json::array();
    for (const auto& t : meta.tasks) tasks.push_back(miobs::task_name(t));
    j["seed"] = meta.seed;
    j["best_metric"] = meta.best_metric;
    j["best_epoch"] = meta.best_epoch;
    j["vocab_size"] = model->checkpoint.model->vocab().size();
    *json = dup_string(j.dump(2));
  });
}

void miobs_model_free(miobs_model* model) { delete model; }

miobs_status miobs_eval(const miobs_model* model, const char* corpus_path, const char* split,
                        size_t k, const char* report_path, char** report) {
  MIOBS_REQUIRE(model);
  MIOBS_REQUIRE(corpus_path);
  return guarded([&] {
    const miobs::Corpus corpus = miobs::select_split(
        miobs::load_corpus(corpus_path), model->checkpoint.meta, split ? split : "all");
    const std::string text =
        miobs::evaluate_corpus(*model->checkpoint.model, corpus, k).to_json().dump(2) + "\n";
    if (report_path != nullptr) write_file(report_path, text);
    if (report != nullptr) *report = dup_string(text);
  });
}

miobs_status miobs_eval_predictions(const char* corpus_path, const char* predictions_path,
                                    size_t k, const char* report_path, char** report) {
  MIOBS_REQUIRE(corpus_path);
  MIOBS_REQUIRE(predictions_path);
  return guarded([&] {
    const std::string text = miobs::evaluate_predictions(miobs::load_corpus(corpus_path),
                                                         miobs::load_jsonl(predictions_path), k)
                                 .to_json()
                                 .dump(2) +
                             "\n";
    if (report_path != nullptr) write_file(report_path, text);
    if (report != nullptr) *report = dup_string(text);
  });
}

miobs_status miobs_predict(const miobs_model* model, const char* corpus_path, size_t k,
                           const char* out_path) {
  MIOBS_REQUIRE(model);
  MIOBS_REQUIRE(corpus_path);
  MIOBS_REQUIRE(out_path);
  return guarded([&] {
    std::string text;
    for (const auto& r :
         miobs::predict_records(*model->checkpoint.model, miobs::load_corpus(corpus_path), k)) {
      text += r.dump();
      text += '\n';
    }
    write_file(out_path, text);
  });
}

miobs_status miobs_ablate(const miobs_config* config, const char* corpus_path, const char* grid,
                          size_t k, size_t threads, const char* out_path, char** table) {
  MIOBS_REQUIRE(config);
  MIOBS_REQUIRE(corpus_path);
  MIOBS_REQUIRE(grid);
  return guarded([&] {
    const auto rows = miobs::ablate(config->value, miobs::load_corpus(corpus_path),
                                    miobs::parse_grid(grid), k, threads);
    const std::string text = miobs::ablation_table(rows, k);
    if (out_path != nullptr) write_file(out_path, text);
    if (table != nullptr) *table = dup_string(text);
  });
}

miobs_status miobs_server_new(const miobs_server_options* options, miobs_server** out) {
  MIOBS_REQUIRE(options);
  MIOBS_REQUIRE(out);
  return guarded([&] {
    auto load = [](const char* path) -> std::shared_ptr<const miobs::Model> {
      if (path == nullptr) return nullptr;
      return miobs::load_checkpoint(path).model;
    };
    miobs::ObserverModels models;
    models.client_categorize = load(options->client_categorize);
    models.client_forecast = load(options->client_forecast);
    models.therapist_categorize = load(options->therapist_categorize);
    models.therapist_forecast = load(options->therapist_forecast);
    auto check = [](const std::shared_ptr<const miobs::Model>& m, miobs::TaskSpec want,
                    const char* flag) {
      if (m && !(m->config().primary() == want)) {
        throw miobs::ConfigError(std::string(flag) + " checkpoint is a " +
                                 miobs::task_name(m->config().primary()) + " model");
      }
    };
    using miobs::Speaker;
    using miobs::Task;
    check(models.client_categorize, {Task::kCategorize, Speaker::kClient}, "client categorize");
    check(models.client_forecast, {Task::kForecast, Speaker::kClient}, "client forecast");
    check(models.therapist_categorize, {Task::kCategorize, Speaker::kTherapist},
          "therapist categorize");
    check(models.therapist_forecast, {Task::kForecast, Speaker::kTherapist},
          "therapist forecast");

    auto s = std::make_unique<miobs_server>();
    s->observer = std::make_unique<miobs::Observer>(
        std::move(models), options->replay_log ? options->replay_log : "");
    if (options->replay_from != nullptr) s->observer->replay(options->replay_from);
    s->http = std::make_unique<miobs::HttpServer>(*s->observer);
    *out = s.release();
  });
}

miobs_status miobs_server_start(miobs_server* server, const char* host, int port,
                                int* bound_port) {
  MIOBS_REQUIRE(server);
  return guarded([&] {
    const int p = server->http->start(host ? host : "127.0.0.1", port);
    if (bound_port != nullptr) *bound_port = p;
  });
}

miobs_status miobs_server_stop(miobs_server* server) {
  MIOBS_REQUIRE(server);
  return guarded([&] { server->http->stop(); });
}

void miobs_server_free(miobs_server* server) {
  if (server == nullptr) return;
  server->http.reset();
  delete server;
}

}  // extern "C"
