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

#ifndef MIOBS_CORE_PIPELINE_H_
#define MIOBS_CORE_PIPELINE_H_

// End-to-end operations behind the CLI subcommands.

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "core/config.h"
#include "core/data.h"
#include "core/metrics.h"
#include "core/model.h"
#include "core/train.h"
#include "json.hpp"

namespace miobs {

struct TrainOutcome {
  std::unique_ptr<Model> model;
  CheckpointMeta meta;
  FitResult fit;
  EvalReport test;  // primary task on the held-out split
};

// Splits `corpus` by session, trains on the train part with early stopping on
// dev, and reports the primary task on test. Epoch logs go to `on_epoch`.
TrainOutcome train_run(const RunConfig& cfg, const Corpus& corpus, std::size_t k = 3,
                       const EpochCallback& on_epoch = nullptr);

// The sessions of `corpus` that `meta` assigned to `split` ("all", "train",
// "dev" or "test").
Corpus select_split(const Corpus& corpus, const CheckpointMeta& meta, const std::string& split);

// Primary-task report over every window of `corpus`.
EvalReport evaluate_corpus(const Model& model, const Corpus& corpus, std::size_t k);

// One JSON record per window of the model's primary task:
//   categorize: {session_id, index, task, speaker, code, distribution}
//   forecast:   {session_id, index, task, speaker, k, top, warning, distribution}
// `index` is the anchor utterance; a forecast targets index + 1.
std::vector<nlohmann::ordered_json> predict_records(const Model& model, const Corpus& corpus,
                                                    std::size_t k);

// Scores prediction records against the gold labels in `corpus`. All records
// must share one task and speaker role.
EvalReport evaluate_predictions(const Corpus& corpus,
                                const std::vector<nlohmann::json>& records, std::size_t k);
std::vector<nlohmann::json> load_jsonl(const std::string& path);

// ---- ablation ---------------------------------------------------------------

// Axes varied one at a time from the base config, e.g.
// {{"window", {"0", "1", "4"}}, {"word_attention", {"none", "bidaf"}}}.
// Window 0 is the anchor alone.
using AblationGrid = std::vector<std::pair<std::string, std::vector<std::string>>>;

// "window=0,1,4;word_attention=none,bidaf"
AblationGrid parse_grid(const std::string& text);

struct AblationRow {
  std::string axis;
  std::string value;
  double dev_macro_f1 = 0.0;
  double test_macro_f1 = 0.0;
  double test_recall_at_k = 0.0;
  std::size_t best_epoch = 0;
};

// Cells run on up to `threads` threads; rows keep grid order.
std::vector<AblationRow> ablate(const RunConfig& base, const Corpus& corpus,
                                const AblationGrid& grid, std::size_t k, std::size_t threads);
std::string ablation_table(const std::vector<AblationRow>& rows, std::size_t k);

// Drops head inputs a changed config cannot produce, falling back to the
// skeleton's plain summary.
void adapt_head_inputs(ModelConfig& c);

}  // namespace miobs

#endif  // MIOBS_CORE_PIPELINE_H_
