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

#ifndef MIOBS_CORE_TRAIN_H_
#define MIOBS_CORE_TRAIN_H_

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "core/data.h"
#include "core/metrics.h"
#include "core/model.h"
#include "core/parameters.h"
#include "json.hpp"

namespace miobs {

enum class MtlMode { kSingle, kJoint, kAlternateAnno, kAlternateFore, kAll };

std::string_view to_string(MtlMode m);
MtlMode parse_mtl_mode(std::string_view s);

struct TrainConfig {
  double lr = 3e-4;
  double clip = 5.0;
  std::size_t batch = 32;
  std::size_t epochs = 100;
  std::size_t patience = 10;
  std::uint64_t seed = 1;
  MtlMode mtl = MtlMode::kSingle;
  double dev_fraction = 0.1;
  double test_fraction = 0.2;

  bool set(std::string_view key, std::string_view value);
  void validate() const;
  nlohmann::ordered_json to_json() const;
  static TrainConfig FromJson(const nlohmann::json& j);
};

// Heads trained together and how their losses meet the optimizer: every
// group takes one optimizer step per round on the summed mean losses of its
// tasks, and groups take turns in order.
struct MtlSchedule {
  MtlMode mode = MtlMode::kSingle;
  std::vector<TaskSpec> tasks;
  std::vector<std::vector<std::size_t>> groups;

  static MtlSchedule For(MtlMode mode, const TaskSpec& primary);
  std::size_t primary_index(const TaskSpec& primary) const;
};

// ---- optimizer --------------------------------------------------------------

struct AdamState {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  std::uint64_t step = 0;
  std::vector<Tensor> m;
  std::vector<Tensor> v;
};

// One bias-corrected Adam update from each parameter's grad. Rows flagged
// zero_first_row stay zero.
void adam_step(const std::vector<Parameter*>& params, AdamState& state, double lr);

double global_norm(const std::vector<Parameter*>& params);
// Rescales all grads by max_norm / norm when norm exceeds max_norm. Returns
// the norm before clipping.
double clip_global_norm(const std::vector<Parameter*>& params, double max_norm);

// ---- fitting ----------------------------------------------------------------

struct EpochLog {
  std::size_t epoch = 0;
  double train_loss = 0.0;
  double grad_norm = 0.0;  // mean pre-clip norm over steps
  std::size_t steps = 0;
  std::vector<double> dev_macro_f1;  // per task
  double dev_metric = 0.0;           // mean of dev_macro_f1
  bool improved = false;
  double seconds = 0.0;

  nlohmann::ordered_json to_json() const;
};

struct FitResult {
  std::vector<EpochLog> log;
  double best_metric = -1.0;
  std::size_t best_epoch = 0;
  bool stopped_early = false;
  std::string rng_state;
};

// Labelled windows for each task of `model`, in task order.
std::vector<std::vector<Window>> task_windows(const Model& model, const Corpus& corpus);

std::vector<std::vector<double>> predict_all(const Model& model,
                                             const std::vector<Window>& windows,
                                             std::size_t task = 0);
EvalReport evaluate(const Model& model, const std::vector<Window>& windows,
                    std::size_t task, std::size_t k);

// Builds the vocabulary from `train` and assembles the network for the
// schedule's tasks, seeded by `seed`.
std::unique_ptr<Model> build_model(const ModelConfig& config, const MtlSchedule& schedule,
                                   const Corpus& train, std::uint64_t seed);

using EpochCallback = std::function<void(const EpochLog&)>;

// Trains with early stopping on mean dev macro F1 and leaves the best
// parameters in `model`.
FitResult fit(Model& model, const Corpus& train, const Corpus& dev, const TrainConfig& cfg,
              const MtlSchedule& schedule, const EpochCallback& on_epoch = nullptr);

// ---- checkpoints ------------------------------------------------------------

struct CheckpointMeta {
  ModelConfig model;
  TrainConfig train;
  std::vector<TaskSpec> tasks;
  std::uint64_t seed = 0;
  std::string rng_state;
  double best_metric = 0.0;
  std::size_t best_epoch = 0;
};

void save_checkpoint(const Model& model, const CheckpointMeta& meta, const std::string& path);
std::string checkpoint_bytes(const Model& model, const CheckpointMeta& meta);

struct LoadedCheckpoint {
  CheckpointMeta meta;
  std::unique_ptr<Model> model;
};
LoadedCheckpoint load_checkpoint(const std::string& path);
LoadedCheckpoint parse_checkpoint(const std::string& bytes, const std::string& origin);

}  // namespace miobs

#endif  // MIOBS_CORE_TRAIN_H_
