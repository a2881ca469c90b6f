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

// Command-line front end over the C interface.
//
//   miobs gen-data --seed 7 --out corpus.jsonl
//   miobs train --preset C_C --corpus corpus.jsonl --out cc.ckpt
//   miobs eval --checkpoint cc.ckpt --corpus corpus.jsonl --split test --out report.json
//   miobs predict --checkpoint cc.ckpt --corpus corpus.jsonl --out pred.jsonl
//   miobs ablate --preset C_C --corpus corpus.jsonl --grid "window=0,1,4,8,16"
//   miobs serve --port 8080 --checkpoint-client-cat cc.ckpt ...

#include <atomic>
#include <chrono>
#include <csignal>
#include <cstdio>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "miobs/miobs.h"

namespace {

struct CliError {
  miobs_status status;
};

void check(miobs_status s) {
  if (s != MIOBS_OK) {
    std::fprintf(stderr, "miobs: %s error: %s\n", miobs_status_name(s), miobs_last_error());
    throw CliError{s};
  }
}

// Owns a string handed out by the library.
class OwnedString {
 public:
  OwnedString() = default;
  ~OwnedString() { miobs_string_free(p_); }
  OwnedString(const OwnedString&) = delete;
  OwnedString& operator=(const OwnedString&) = delete;
  char** out() { return &p_; }
  const char* get() const { return p_ ? p_ : ""; }

 private:
  char* p_ = nullptr;
};

class Config {
 public:
  Config() { check(miobs_config_new(&p_)); }
  ~Config() { miobs_config_free(p_); }
  Config(const Config&) = delete;
  Config& operator=(const Config&) = delete;
  miobs_config* get() { return p_; }
  void set(const std::string& key, const std::string& value) {
    check(miobs_config_set(p_, key.c_str(), value.c_str()));
  }

 private:
  miobs_config* p_ = nullptr;
};

class ModelHandle {
 public:
  explicit ModelHandle(const std::string& path) { check(miobs_model_load(path.c_str(), &p_)); }
  ~ModelHandle() { miobs_model_free(p_); }
  ModelHandle(const ModelHandle&) = delete;
  ModelHandle& operator=(const ModelHandle&) = delete;
  const miobs_model* get() const { return p_; }

 private:
  miobs_model* p_ = nullptr;
};

// Shared config flags. --preset is applied first, then the file, then --set.
struct ConfigFlags {
  std::string config_path;
  std::string preset;
  std::vector<std::string> sets;

  void add(CLI::App* app) {
    app->add_option("--config", config_path, "key = value config file")
        ->check(CLI::ExistingFile);
    app->add_option("--preset", preset, "model preset")
        ->check(CLI::IsMember({"C_C", "C_T", "F_C", "F_T"}));
    app->add_option("--set", sets, "extra key=value settings (repeatable)");
  }

  void apply(Config& cfg) const {
    if (!preset.empty()) cfg.set("preset", preset);
    if (!config_path.empty()) check(miobs_config_apply_file(cfg.get(), config_path.c_str()));
    for (const std::string& kv : sets) {
      const auto eq = kv.find('=');
      if (eq == std::string::npos) {
        std::fprintf(stderr, "miobs: --set expects key=value, got '%s'\n", kv.c_str());
        throw CliError{MIOBS_ERR_CONFIG};
      }
      cfg.set(kv.substr(0, eq), kv.substr(eq + 1));
    }
  }
};

std::atomic<bool> g_stop{false};

extern "C" void on_signal(int) { g_stop = true; }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"MI observer: categorize and forecast MISC codes in therapy dialogues"};
  app.require_subcommand(1);
  app.set_version_flag("--version", miobs_version());

  // gen-data
  auto* gen = app.add_subcommand("gen-data", "write the seeded synthetic corpus");
  ConfigFlags gen_flags;
  gen_flags.add(gen);
  std::string gen_out;
  long long gen_seed = -1;
  long long gen_sessions = -1;
  gen->add_option("--out", gen_out, "output corpus (JSONL)")->required();
  gen->add_option("--seed", gen_seed, "generator seed");
  gen->add_option("--sessions", gen_sessions, "number of sessions");

  // train
  auto* train = app.add_subcommand("train", "train a model and write a checkpoint");
  ConfigFlags train_flags;
  train_flags.add(train);
  std::string train_corpus, train_out, train_log;
  long long train_seed = -1;
  std::size_t train_k = 3;
  train->add_option("--corpus", train_corpus, "labelled corpus (JSONL)")
      ->required()
      ->check(CLI::ExistingFile);
  train->add_option("--out", train_out, "checkpoint path")->required();
  train->add_option("--log", train_log, "epoch log (JSONL); default <out>.log.jsonl");
  train->add_option("--seed", train_seed, "split, init and shuffling seed");
  train->add_option("--k", train_k, "recall@k for the test report");

  // eval
  auto* eval = app.add_subcommand("eval", "write an evaluation report");
  std::string eval_ckpt, eval_pred, eval_corpus, eval_out, eval_split = "all";
  std::size_t eval_k = 3;
  auto* eval_ckpt_opt =
      eval->add_option("--checkpoint", eval_ckpt, "model checkpoint")->check(CLI::ExistingFile);
  auto* eval_pred_opt = eval->add_option("--predictions", eval_pred, "predict output (JSONL)")
                            ->check(CLI::ExistingFile);
  eval_ckpt_opt->excludes(eval_pred_opt);
  eval->add_option("--corpus", eval_corpus, "gold corpus (JSONL)")
      ->required()
      ->check(CLI::ExistingFile);
  eval->add_option("--split", eval_split, "sessions to score with --checkpoint")
      ->check(CLI::IsMember({"all", "train", "dev", "test"}));
  eval->add_option("--out", eval_out, "report path (JSON); default stdout");
  eval->add_option("--k", eval_k, "recall@k");

  // predict
  auto* predict = app.add_subcommand("predict", "label a corpus");
  std::string pred_ckpt, pred_corpus, pred_out;
  std::size_t pred_k = 3;
  predict->add_option("--checkpoint", pred_ckpt, "model checkpoint")
      ->required()
      ->check(CLI::ExistingFile);
  predict->add_option("--corpus", pred_corpus, "corpus (JSONL); labels optional")
      ->required()
      ->check(CLI::ExistingFile);
  predict->add_option("--out", pred_out, "predictions (JSONL)")->required();
  predict->add_option("--k", pred_k, "forecast list length");

  // ablate
  auto* ablate = app.add_subcommand("ablate", "train a grid of variants and compare them");
  ConfigFlags ablate_flags;
  ablate_flags.add(ablate);
  std::string abl_corpus, abl_out, abl_grid = "window=0,1,4,8,16";
  long long abl_seed = -1;
  std::size_t abl_k = 3;
  std::size_t abl_threads = 1;
  ablate->add_option("--corpus", abl_corpus, "labelled corpus (JSONL)")
      ->required()
      ->check(CLI::ExistingFile);
  ablate->add_option("--grid", abl_grid,
                     "axes varied one at a time, e.g. window=0,1,4;word_attention=none,gmgru");
  ablate->add_option("--out", abl_out, "table path (markdown); default stdout");
  ablate->add_option("--seed", abl_seed, "training seed");
  ablate->add_option("--k", abl_k, "recall@k");
  ablate->add_option("--threads", abl_threads, "grid cells trained in parallel");

  // serve
  auto* serve = app.add_subcommand("serve", "run the live-session HTTP service");
  std::string host = "127.0.0.1";
  int port = 8080;
  std::string cc, cf, tc, tf, replay_log, replay_from;
  serve->add_option("--host", host, "bind address");
  serve->add_option("--port", port, "TCP port (0 picks one)");
  serve->add_option("--checkpoint-client-cat", cc)->check(CLI::ExistingFile);
  serve->add_option("--checkpoint-client-fore", cf)->check(CLI::ExistingFile);
  serve->add_option("--checkpoint-therapist-cat", tc)->check(CLI::ExistingFile);
  serve->add_option("--checkpoint-therapist-fore", tf)->check(CLI::ExistingFile);
  serve->add_option("--replay-log", replay_log, "append session mutations here");
  serve->add_option("--replay-from", replay_from, "re-apply a log before serving")
      ->check(CLI::ExistingFile);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*gen) {
      Config cfg;
      gen_flags.apply(cfg);
      if (gen_seed >= 0) cfg.set("gen_seed", std::to_string(gen_seed));
      if (gen_sessions >= 0) cfg.set("gen_sessions", std::to_string(gen_sessions));
      check(miobs_gen_data(cfg.get(), gen_out.c_str()));
    } else if (*train) {
      Config cfg;
      train_flags.apply(cfg);
      if (train_seed >= 0) cfg.set("seed", std::to_string(train_seed));
      if (train_log.empty()) train_log = train_out + ".log.jsonl";
      OwnedString summary;
      check(miobs_train(cfg.get(), train_corpus.c_str(), train_out.c_str(), train_log.c_str(),
                        train_k, summary.out()));
      std::printf("%s\n", summary.get());
    } else if (*eval) {
      OwnedString report;
      const char* out = eval_out.empty() ? nullptr : eval_out.c_str();
      if (!eval_ckpt.empty()) {
        ModelHandle model(eval_ckpt);
        check(miobs_eval(model.get(), eval_corpus.c_str(), eval_split.c_str(), eval_k, out,
                         report.out()));
      } else if (!eval_pred.empty()) {
        check(miobs_eval_predictions(eval_corpus.c_str(), eval_pred.c_str(), eval_k, out,
                                     report.out()));
      } else {
        std::fprintf(stderr, "miobs eval: one of --checkpoint or --predictions is required\n");
        return 2;
      }
      if (eval_out.empty()) std::printf("%s", report.get());
    } else if (*predict) {
      ModelHandle model(pred_ckpt);
      check(miobs_predict(model.get(), pred_corpus.c_str(), pred_k, pred_out.c_str()));
    } else if (*ablate) {
      Config cfg;
      ablate_flags.apply(cfg);
      if (abl_seed >= 0) cfg.set("seed", std::to_string(abl_seed));
      OwnedString table;
      check(miobs_ablate(cfg.get(), abl_corpus.c_str(), abl_grid.c_str(), abl_k, abl_threads,
                         abl_out.empty() ? nullptr : abl_out.c_str(), table.out()));
      if (abl_out.empty()) std::printf("%s", table.get());
    } else if (*serve) {
      auto opt = [](const std::string& s) { return s.empty() ? nullptr : s.c_str(); };
      miobs_server_options options{opt(cc), opt(cf), opt(tc), opt(tf), opt(replay_log),
                                   opt(replay_from)};
      miobs_server* server = nullptr;
      check(miobs_server_new(&options, &server));
      int bound = 0;
      if (miobs_server_start(server, host.c_str(), port, &bound) != MIOBS_OK) {
        std::fprintf(stderr, "miobs: %s\n", miobs_last_error());
        miobs_server_free(server);
        return 1;
      }
      std::signal(SIGINT, on_signal);
      std::signal(SIGTERM, on_signal);
      std::printf("listening on http://%s:%d\n", host.c_str(), bound);
      std::fflush(stdout);
      while (!g_stop) std::this_thread::sleep_for(std::chrono::milliseconds(100));
      miobs_server_stop(server);
      miobs_server_free(server);
    }
  } catch (const CliError&) {
    return 1;
  }
  return 0;
}
