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

#ifndef MIOBS_CORE_MODEL_H_
#define MIOBS_CORE_MODEL_H_

#include <cstddef>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "core/attention.h"
#include "core/data.h"
#include "core/embed.h"
#include "core/encoders.h"
#include "core/labels.h"
#include "core/loss.h"
#include "core/parameters.h"
#include "core/tensor.h"
#include "json.hpp"

namespace miobs {

enum class Skeleton { kHgru, kConcat };
enum class Scoring { kConcat, kAdd };

// Vectors a classification head can read.
enum class HeadInput { kH, kV, kSeg, kWordAtt, kSelfAtt, kC };

std::string_view to_string(Skeleton s);
std::string_view to_string(Scoring s);
std::string_view to_string(HeadInput h);
std::string_view to_string(WordAttentionKind k);
std::string_view to_string(UtteranceAttentionKind k);
Skeleton parse_skeleton(std::string_view s);
Scoring parse_scoring(std::string_view s);
HeadInput parse_head_input(std::string_view s);
WordAttentionKind parse_word_attention(std::string_view s);
UtteranceAttentionKind parse_utterance_attention(std::string_view s);

struct TaskSpec {
  Task task = Task::kCategorize;
  Speaker role = Speaker::kClient;
  bool operator==(const TaskSpec&) const = default;
};
std::string task_name(const TaskSpec& t);  // e.g. "client_categorize"

struct ModelConfig {
  std::string preset;  // informational; empty for custom configs
  Task task = Task::kCategorize;
  Speaker role = Speaker::kClient;
  Skeleton skeleton = Skeleton::kHgru;
  WordAttentionKind word_attention = WordAttentionKind::kNone;
  UtteranceAttentionKind utterance_attention = UtteranceAttentionKind::kNone;
  std::vector<HeadInput> head_inputs = {HeadInput::kH};
  Scoring scoring = Scoring::kConcat;
  std::size_t window = 8;
  std::size_t d_w = 100;
  std::size_t d_h = 64;
  std::size_t d_s = 8;
  std::size_t heads = 4;
  std::size_t hops = 2;
  double embed_dropout = 0.3;
  double head_dropout = 0.2;
  double dialogue_dropout = 0.0;
  LossVariant loss = LossVariant::kFocal;
  double gamma = 0.0;
  std::vector<double> alpha;  // empty: the role's default weights
  std::size_t min_count = 1;
  std::string vectors;  // optional static word vectors for initialization

  // Named configurations C_C, C_T, F_C, F_T.
  static ModelConfig Preset(std::string_view name);

  TaskSpec primary() const { return {task, role}; }
  bool uses(HeadInput h) const;
  // Applies one "key = value" setting; false if the key is not a model key.
  bool set(std::string_view key, std::string_view value);
  void validate() const;
  void validate_task(const TaskSpec& t) const;
  FocalConfig loss_for(Speaker role) const;

  nlohmann::ordered_json to_json() const;
  static ModelConfig FromJson(const nlohmann::json& j);
};

// A shared encoder with one classification head per task. Heads read the
// inputs listed in the config; forecast heads also read the next speaker.
class Model {
 public:
  Model(ModelConfig config, Vocab vocab, std::uint64_t seed,
        std::vector<TaskSpec> tasks = {}, const Tensor* word_init = nullptr);
  Model(const Model&) = delete;
  Model& operator=(const Model&) = delete;

  struct Output {
    Var logits;
    Var probs;
    std::vector<Var> dialogue_states;       // H_1..H_N (hgru only)
    std::map<HeadInput, Var> inputs;        // head input vectors
    std::vector<Tensor> word_weights;       // word attention simplexes
    std::vector<Tensor> utterance_weights;  // utterance attention simplexes
  };

  // Window length must equal the configured window size.
  Output forward(Tape& tape, const Window& window, std::size_t task = 0,
                 bool train = false, Rng* rng = nullptr) const;
  // Eval-mode label distribution.
  std::vector<double> predict(const Window& window, std::size_t task = 0) const;
  // Forecast for the utterance after `history`, spoken by `next`. Takes no
  // argument for that utterance's content.
  std::vector<double> forecast(const Window& history, Speaker next,
                               std::size_t task = 0) const;

  const ModelConfig& config() const { return config_; }
  const std::vector<TaskSpec>& tasks() const { return tasks_; }
  std::optional<std::size_t> task_index(const TaskSpec& t) const;
  const LabelSet& labels(std::size_t task = 0) const;
  const Vocab& vocab() const { return vocab_; }
  ParameterStore& parameters() { return store_; }
  const ParameterStore& parameters() const { return store_; }
  std::uint64_t seed() const { return seed_; }

  // Component access for composing reference computations in tests.
  const Embedder& embedder() const { return *embedder_; }
  const BiGru* utterance_encoder() const { return utterance_.get(); }
  const DialogueGru* dialogue_encoder() const { return dialogue_.get(); }
  const BiGru* concat_encoder() const { return concat_.get(); }
  const WordAttention* word_attention() const { return word_att_.get(); }
  const MultiHeadAttention* utterance_attention() const { return utt_att_.get(); }

  struct Mlp {
    Parameter* w1;
    Parameter* b1;
    Parameter* w2;
    Parameter* b2;
  };
  // MLPs of one head: one in concat scoring, one per input in add scoring.
  const std::vector<Mlp>& head(std::size_t task) const { return heads_.at(task); }
  std::size_t input_width(HeadInput h) const;

 private:
  Var run_mlp(Tape& tape, const Mlp& mlp, Var x, bool train, Rng* rng) const;

  ModelConfig config_;
  Vocab vocab_;
  std::uint64_t seed_;
  std::vector<TaskSpec> tasks_;
  ParameterStore store_;
  std::unique_ptr<Embedder> embedder_;
  std::unique_ptr<BiGru> utterance_;
  std::unique_ptr<DialogueGru> dialogue_;
  std::unique_ptr<BiGru> concat_;
  Parameter* boundary_ = nullptr;
  std::unique_ptr<WordAttention> word_att_;
  std::unique_ptr<MultiHeadAttention> utt_att_;
  std::vector<std::vector<Mlp>> heads_;
};

}  // namespace miobs

#endif  // MIOBS_CORE_MODEL_H_
