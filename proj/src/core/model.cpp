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

#include "core/model.h"

#include <algorithm>
#include <charconv>
#include <cmath>

#include "core/error.h"

namespace miobs {

// ---- enum names -------------------------------------------------------------

std::string_view to_string(Skeleton s) { return s == Skeleton::kHgru ? "hgru" : "concat"; }
std::string_view to_string(Scoring s) { return s == Scoring::kConcat ? "concat" : "add"; }

std::string_view to_string(HeadInput h) {
  switch (h) {
    case HeadInput::kH: return "H_n";
    case HeadInput::kV: return "v_n";
    case HeadInput::kSeg: return "v_seg";
    case HeadInput::kWordAtt: return "v_wordatt";
    case HeadInput::kSelfAtt: return "v_selfatt";
    case HeadInput::kC: return "C_n";
  }
  return "H_n";
}

std::string_view to_string(WordAttentionKind k) {
  switch (k) {
    case WordAttentionKind::kNone: return "none";
    case WordAttentionKind::kBidaf: return "bidaf";
    case WordAttentionKind::kGmgru: return "gmgru";
  }
  return "none";
}

std::string_view to_string(UtteranceAttentionKind k) {
  switch (k) {
    case UtteranceAttentionKind::kNone: return "none";
    case UtteranceAttentionKind::kAnchor: return "anchor42";
    case UtteranceAttentionKind::kSelf: return "self42";
  }
  return "none";
}

Skeleton parse_skeleton(std::string_view s) {
  if (s == "hgru") return Skeleton::kHgru;
  if (s == "concat" || s == "con") return Skeleton::kConcat;
  throw ConfigError("unknown skeleton '" + std::string(s) + "' (hgru, concat)");
}

Scoring parse_scoring(std::string_view s) {
  if (s == "concat") return Scoring::kConcat;
  if (s == "add") return Scoring::kAdd;
  throw ConfigError("unknown scoring '" + std::string(s) + "' (concat, add)");
}

HeadInput parse_head_input(std::string_view s) {
  for (HeadInput h : {HeadInput::kH, HeadInput::kV, HeadInput::kSeg, HeadInput::kWordAtt,
                      HeadInput::kSelfAtt, HeadInput::kC}) {
    if (s == to_string(h)) return h;
  }
  throw ConfigError("unknown head input '" + std::string(s) +
                    "' (H_n, v_n, v_seg, v_wordatt, v_selfatt, C_n)");
}

WordAttentionKind parse_word_attention(std::string_view s) {
  if (s == "none") return WordAttentionKind::kNone;
  if (s == "bidaf") return WordAttentionKind::kBidaf;
  if (s == "gmgru") return WordAttentionKind::kGmgru;
  throw ConfigError("unknown word attention '" + std::string(s) + "' (none, bidaf, gmgru)");
}

UtteranceAttentionKind parse_utterance_attention(std::string_view s) {
  if (s == "none") return UtteranceAttentionKind::kNone;
  if (s == "anchor42" || s == "anchor") return UtteranceAttentionKind::kAnchor;
  if (s == "self42" || s == "self") return UtteranceAttentionKind::kSelf;
  throw ConfigError("unknown utterance attention '" + std::string(s) +
                    "' (none, anchor42, self42)");
}

std::string task_name(const TaskSpec& t) {
  return std::string(role_name(t.role)) + "_" + std::string(to_string(t.task));
}

// ---- config -----------------------------------------------------------------

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_list(std::string_view s) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= s.size()) {
    auto comma = s.find(',', start);
    if (comma == std::string_view::npos) comma = s.size();
    std::string item = trim(s.substr(start, comma - start));
    if (!item.empty()) out.push_back(std::move(item));
    start = comma + 1;
  }
  return out;
}

std::size_t parse_size(std::string_view key, std::string_view v) {
  std::size_t out = 0;
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size()) {
    throw ConfigError(std::string(key) + ": expected a non-negative integer, got '" +
                      std::string(v) + "'");
  }
  return out;
}

double parse_double(std::string_view key, std::string_view v) {
  try {
    std::size_t used = 0;
    const std::string s(v);
    double d = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return d;
  } catch (const std::logic_error&) {
    throw ConfigError(std::string(key) + ": expected a number, got '" + std::string(v) + "'");
  }
}

}  // namespace

ModelConfig ModelConfig::Preset(std::string_view name) {
  ModelConfig c;
  c.preset = std::string(name);
  c.skeleton = Skeleton::kHgru;
  c.window = 8;
  c.loss = LossVariant::kFocal;
  if (name == "C_C") {
    c.task = Task::kCategorize;
    c.role = Speaker::kClient;
    c.head_inputs = {HeadInput::kH, HeadInput::kV};
    c.scoring = Scoring::kAdd;
    c.gamma = 1.0;
  } else if (name == "C_T") {
    c.task = Task::kCategorize;
    c.role = Speaker::kTherapist;
    c.word_attention = WordAttentionKind::kGmgru;
    c.utterance_attention = UtteranceAttentionKind::kAnchor;
    c.head_inputs = {HeadInput::kH, HeadInput::kSelfAtt};
    c.scoring = Scoring::kConcat;
    c.gamma = 0.0;
  } else if (name == "F_C" || name == "F_T") {
    c.task = Task::kForecast;
    c.role = name == "F_C" ? Speaker::kClient : Speaker::kTherapist;
    c.utterance_attention = UtteranceAttentionKind::kSelf;
    c.head_inputs = {HeadInput::kH, HeadInput::kSelfAtt};
    c.scoring = Scoring::kConcat;
    c.gamma = name == "F_C" ? 1.0 : 3.0;
  } else {
    throw ConfigError("unknown preset '" + std::string(name) + "' (C_C, C_T, F_C, F_T)");
  }
  return c;
}

bool ModelConfig::uses(HeadInput h) const {
  return std::find(head_inputs.begin(), head_inputs.end(), h) != head_inputs.end();
}

bool ModelConfig::set(std::string_view key, std::string_view raw) {
  const std::string v = trim(raw);
  if (key == "preset") {
    *this = Preset(v);
  } else if (key == "task") {
    auto t = parse_task(v);
    if (!t) throw ConfigError("task: expected categorize or forecast, got '" + v + "'");
    task = *t;
  } else if (key == "role") {
    auto r = parse_role(v);
    if (!r) throw ConfigError("role: expected client or therapist, got '" + v + "'");
    role = *r;
  } else if (key == "skeleton") {
    skeleton = parse_skeleton(v);
  } else if (key == "word_attention") {
    word_attention = parse_word_attention(v);
  } else if (key == "utterance_attention") {
    utterance_attention = parse_utterance_attention(v);
  } else if (key == "head_inputs") {
    head_inputs.clear();
    for (const auto& item : split_list(v)) head_inputs.push_back(parse_head_input(item));
  } else if (key == "scoring") {
    scoring = parse_scoring(v);
  } else if (key == "window") {
    window = parse_size(key, v);
  } else if (key == "d_w") {
    d_w = parse_size(key, v);
  } else if (key == "d_h") {
    d_h = parse_size(key, v);
  } else if (key == "d_s") {
    d_s = parse_size(key, v);
  } else if (key == "heads") {
    heads = parse_size(key, v);
  } else if (key == "hops") {
    hops = parse_size(key, v);
  } else if (key == "embed_dropout") {
    embed_dropout = parse_double(key, v);
  } else if (key == "head_dropout") {
    head_dropout = parse_double(key, v);
  } else if (key == "dialogue_dropout") {
    dialogue_dropout = parse_double(key, v);
  } else if (key == "loss") {
    loss = parse_loss_variant(v);
  } else if (key == "gamma") {
    gamma = parse_double(key, v);
  } else if (key == "alpha") {
    alpha.clear();
    for (const auto& item : split_list(v)) alpha.push_back(parse_double(key, item));
  } else if (key == "min_count") {
    min_count = parse_size(key, v);
  } else if (key == "vectors") {
    vectors = v;
  } else {
    return false;
  }
  return true;
}

void ModelConfig::validate_task(const TaskSpec& t) const {
  std::vector<HeadInput> allowed;
  if (skeleton == Skeleton::kHgru) {
    allowed = {HeadInput::kH, HeadInput::kV, HeadInput::kSelfAtt};
  } else if (t.task == Task::kCategorize) {
    allowed = {HeadInput::kSeg, HeadInput::kWordAtt, HeadInput::kV, HeadInput::kSelfAtt};
  } else {
    allowed = {HeadInput::kC, HeadInput::kV, HeadInput::kSelfAtt};
  }
  for (HeadInput h : head_inputs) {
    if (std::find(allowed.begin(), allowed.end(), h) == allowed.end()) {
      throw ConfigError("head input " + std::string(to_string(h)) + " is not available to " +
                        std::string(to_string(skeleton)) + " " +
                        std::string(to_string(t.task)) + " models");
    }
  }
  if (!alpha.empty()) FocalConfig{loss, alpha, gamma}.validate(LabelSet::For(t.role).size());
}

void ModelConfig::validate() const {
  auto positive = [](std::size_t v, const char* name) {
    if (v == 0) throw ConfigError(std::string(name) + " must be >= 1");
  };
  positive(window, "window");
  positive(d_w, "d_w");
  positive(d_h, "d_h");
  positive(d_s, "d_s");
  if (head_inputs.empty()) throw ConfigError("head_inputs must list at least one vector");
  for (std::size_t i = 0; i < head_inputs.size(); ++i)
    for (std::size_t j = i + 1; j < head_inputs.size(); ++j)
      if (head_inputs[i] == head_inputs[j])
        throw ConfigError("head input " + std::string(to_string(head_inputs[i])) + " listed twice");
  for (double p : {embed_dropout, head_dropout, dialogue_dropout}) {
    if (!(p >= 0.0 && p < 1.0)) throw ConfigError("dropout rates must lie in [0, 1)");
  }
  if (!(gamma >= 0.0)) throw ConfigError("gamma must be >= 0");
  if (uses(HeadInput::kSelfAtt) && utterance_attention == UtteranceAttentionKind::kNone) {
    throw ConfigError("v_selfatt needs utterance_attention anchor42 or self42");
  }
  if (uses(HeadInput::kWordAtt) && word_attention == WordAttentionKind::kNone) {
    throw ConfigError("v_wordatt needs word_attention bidaf or gmgru");
  }
  if (utterance_attention != UtteranceAttentionKind::kNone) {
    positive(heads, "heads");
    positive(hops, "hops");
    const std::size_t width = (skeleton == Skeleton::kHgru ? 2 : 4) * d_h;
    if (width % heads != 0) {
      throw ConfigError("utterance attention width " + std::to_string(width) +
                        " is not divisible by " + std::to_string(heads) + " heads");
    }
  }
  validate_task(primary());
}

FocalConfig ModelConfig::loss_for(Speaker r) const {
  FocalConfig f;
  f.variant = loss;
  f.gamma = gamma;
  const std::size_t n = LabelSet::For(r).size();
  if (loss == LossVariant::kCrossEntropy) {
    f.alpha.assign(n, 1.0);
    f.gamma = 0.0;
  } else if (!alpha.empty() && r == role) {
    f.alpha = alpha;
  } else {
    f.alpha = FocalConfig::default_alpha(r);
  }
  if (loss == LossVariant::kWeightedCrossEntropy) f.gamma = 0.0;
  f.validate(n);
  return f;
}

nlohmann::ordered_json ModelConfig::to_json() const {
  nlohmann::ordered_json j;
  j["preset"] = preset;
  j["task"] = std::string(to_string(task));
  j["role"] = std::string(role_name(role));
  j["skeleton"] = std::string(to_string(skeleton));
  j["word_attention"] = std::string(to_string(word_attention));
  j["utterance_attention"] = std::string(to_string(utterance_attention));
  std::vector<std::string> inputs;
  for (HeadInput h : head_inputs) inputs.emplace_back(to_string(h));
  j["head_inputs"] = inputs;
  j["scoring"] = std::string(to_string(scoring));
  j["window"] = window;
  j["d_w"] = d_w;
  j["d_h"] = d_h;
  j["d_s"] = d_s;
  j["heads"] = heads;
  j["hops"] = hops;
  j["embed_dropout"] = embed_dropout;
  j["head_dropout"] = head_dropout;
  j["dialogue_dropout"] = dialogue_dropout;
  j["loss"] = std::string(to_string(loss));
  j["gamma"] = gamma;
  j["alpha"] = alpha;
  j["min_count"] = min_count;
  j["vectors"] = vectors;
  return j;
}

ModelConfig ModelConfig::FromJson(const nlohmann::json& j) {
  ModelConfig c;
  try {
    c.preset = j.at("preset").get<std::string>();
    c.set("task", j.at("task").get<std::string>());
    c.set("role", j.at("role").get<std::string>());
    c.skeleton = parse_skeleton(j.at("skeleton").get<std::string>());
    c.word_attention = parse_word_attention(j.at("word_attention").get<std::string>());
    c.utterance_attention =
        parse_utterance_attention(j.at("utterance_attention").get<std::string>());
    c.head_inputs.clear();
    for (const auto& h : j.at("head_inputs")) c.head_inputs.push_back(parse_head_input(h.get<std::string>()));
    c.scoring = parse_scoring(j.at("scoring").get<std::string>());
    c.window = j.at("window").get<std::size_t>();
    c.d_w = j.at("d_w").get<std::size_t>();
    c.d_h = j.at("d_h").get<std::size_t>();
    c.d_s = j.at("d_s").get<std::size_t>();
    c.heads = j.at("heads").get<std::size_t>();
    c.hops = j.at("hops").get<std::size_t>();
    c.embed_dropout = j.at("embed_dropout").get<double>();
    c.head_dropout = j.at("head_dropout").get<double>();
    c.dialogue_dropout = j.at("dialogue_dropout").get<double>();
    c.loss = parse_loss_variant(j.at("loss").get<std::string>());
    c.gamma = j.at("gamma").get<double>();
    c.alpha = j.at("alpha").get<std::vector<double>>();
    c.min_count = j.at("min_count").get<std::size_t>();
    c.vectors = j.at("vectors").get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("model config: ") + e.what());
  }
  return c;
}

// ---- model ------------------------------------------------------------------

Model::Model(ModelConfig config, Vocab vocab, std::uint64_t seed, std::vector<TaskSpec> tasks,
             const Tensor* word_init)
    : config_(std::move(config)),
      vocab_(std::move(vocab)),
      seed_(seed),
      tasks_(std::move(tasks)),
      store_(seed) {
  config_.validate();
  if (tasks_.empty()) tasks_.push_back(config_.primary());
  for (const TaskSpec& t : tasks_) config_.validate_task(t);

  const std::size_t d_h = config_.d_h;
  embedder_ = std::make_unique<Embedder>(store_, vocab_, config_.d_w, config_.d_s, word_init);
  std::size_t d_model = 2 * d_h;
  if (config_.skeleton == Skeleton::kHgru) {
    utterance_ = std::make_unique<BiGru>(store_, "utterance", config_.d_w, d_h);
    dialogue_ = std::make_unique<DialogueGru>(store_, "dialogue", 2 * d_h + config_.d_s, d_h);
  } else {
    concat_ = std::make_unique<BiGru>(store_, "concat", config_.d_w, d_h);
    boundary_ = &store_.add_uniform("concat.boundary", Shape{config_.d_w}, 0.1);
    d_model = 4 * d_h;
  }
  word_att_ = make_word_attention(config_.word_attention, store_, "word_attention", 2 * d_h, d_h);
  if (config_.utterance_attention != UtteranceAttentionKind::kNone) {
    utt_att_ = std::make_unique<MultiHeadAttention>(store_, "utterance_attention", d_model,
                                                    config_.heads, config_.hops);
  }

  for (std::size_t t = 0; t < tasks_.size(); ++t) {
    const std::size_t n_labels = LabelSet::For(tasks_[t].role).size();
    const std::size_t extra = tasks_[t].task == Task::kForecast ? config_.d_s : 0;
    std::vector<std::size_t> widths;
    if (config_.scoring == Scoring::kConcat) {
      std::size_t w = extra;
      for (HeadInput h : config_.head_inputs) w += input_width(h);
      widths.push_back(w);
    } else {
      for (std::size_t i = 0; i < config_.head_inputs.size(); ++i)
        widths.push_back(input_width(config_.head_inputs[i]) + (i == 0 ? extra : 0));
    }
    std::vector<Mlp> mlps;
    for (std::size_t i = 0; i < widths.size(); ++i) {
      const std::string name = "task" + std::to_string(t) + ".mlp" + std::to_string(i);
      const double b1 = 1.0 / std::sqrt(static_cast<double>(widths[i]));
      const double b2 = 1.0 / std::sqrt(static_cast<double>(d_h));
      Mlp m;
      m.w1 = &store_.add_uniform(name + ".w1", Shape{widths[i], d_h}, b1);
      m.b1 = &store_.add_zeros(name + ".b1", Shape{d_h});
      m.w2 = &store_.add_uniform(name + ".w2", Shape{d_h, n_labels}, b2);
      m.b2 = &store_.add_zeros(name + ".b2", Shape{n_labels});
      mlps.push_back(m);
    }
    heads_.push_back(std::move(mlps));
  }
}

std::size_t Model::input_width(HeadInput h) const {
  const std::size_t d_h = config_.d_h;
  switch (h) {
    case HeadInput::kH: return d_h;
    case HeadInput::kV: return 2 * d_h;
    case HeadInput::kSeg: return 4 * d_h;
    case HeadInput::kWordAtt: return 2 * d_h;
    case HeadInput::kSelfAtt: return config_.skeleton == Skeleton::kHgru ? 2 * d_h : 4 * d_h;
    case HeadInput::kC: return 2 * d_h;
  }
  return d_h;
}

std::optional<std::size_t> Model::task_index(const TaskSpec& t) const {
  for (std::size_t i = 0; i < tasks_.size(); ++i)
    if (tasks_[i] == t) return i;
  return std::nullopt;
}

const LabelSet& Model::labels(std::size_t task) const {
  return LabelSet::For(tasks_.at(task).role);
}

Var Model::run_mlp(Tape& tape, const Mlp& mlp, Var x, bool train, Rng* rng) const {
  const double p = config_.head_dropout;
  Var h = add(matmul(dropout(x, p, train, rng), tape.param(*mlp.w1)), tape.param(*mlp.b1));
  h = relu(h);
  return add(matmul(dropout(h, p, train, rng), tape.param(*mlp.w2)), tape.param(*mlp.b2));
}

Model::Output Model::forward(Tape& tape, const Window& window, std::size_t task, bool train,
                             Rng* rng) const {
  const std::size_t N = config_.window;
  if (window.slots.size() != N) {
    throw ContractError("window has " + std::to_string(window.slots.size()) +
                        " slots, model expects " + std::to_string(N));
  }
  if (task >= tasks_.size()) throw ContractError("task index out of range");
  if (window.slots.back().pad) throw ContractError("the anchor slot cannot be padding");
  if (train && rng == nullptr) throw ContractError("training forward needs an rng");
  const TaskSpec spec = tasks_[task];
  const std::size_t d_h = config_.d_h;

  // Pad speakers alternate backwards from the first real slot, whatever the
  // window says, so pads carry position only.
  std::vector<Speaker> speakers(N);
  for (std::size_t k = N; k-- > 0;) {
    const Slot& s = window.slots[k];
    speakers[k] = !s.pad ? s.speaker
                         : (speakers[k + 1] == Speaker::kClient ? Speaker::kTherapist
                                                                : Speaker::kClient);
  }

  Output out;
  std::vector<Var> words(N), speaker_vecs(N);
  for (std::size_t k = 0; k < N; ++k) {
    const Slot& s = window.slots[k];
    std::vector<std::size_t> ids = s.pad ? std::vector<std::size_t>{} : vocab_.encode(s.tokens);
    Embedder::Embedded e =
        embedder_->embed_utterance(tape, ids, speakers[k], config_.embed_dropout, train, rng);
    words[k] = e.words;
    speaker_vecs[k] = e.speaker;
  }

  std::vector<Var> attended;  // utterance-level vectors for utterance attention
  if (config_.skeleton == Skeleton::kHgru) {
    std::vector<SequenceEncoding> enc(N);
    for (std::size_t k = 0; k < N; ++k) enc[k] = utterance_->encode(tape, words[k]);
    std::vector<Var> v(N);
    for (std::size_t k = 0; k < N; ++k) v[k] = enc[k].summary;
    out.inputs[HeadInput::kV] = enc[N - 1].summary;
    if (word_att_) {
      const Var keys = enc[N - 1].states;
      for (std::size_t k = 0; k < N; ++k) {
        if (window.slots[k].pad) continue;
        WordAttentionOutput wa = word_att_->attend(tape, enc[k].states, keys);
        v[k] = wa.vector;
        for (auto& w : wa.weights) out.word_weights.push_back(std::move(w));
      }
    }
    std::vector<Var> steps(N);
    for (std::size_t k = 0; k < N; ++k) {
      steps[k] = dropout(concat({v[k], speaker_vecs[k]}), config_.dialogue_dropout, train, rng);
    }
    out.dialogue_states = dialogue_->encode(tape, steps);
    out.inputs[HeadInput::kH] = out.dialogue_states.back();
    for (std::size_t k = 0; k < N; ++k)
      if (!window.slots[k].pad) attended.push_back(v[k]);
  } else {
    ConcatEncoding ce =
        encode_dialogue_concat(tape, *concat_, words, tape.param(*boundary_));
    out.inputs[HeadInput::kC] = ce.final_state;
    out.inputs[HeadInput::kSeg] = ce.segments.back();
    if (config_.uses(HeadInput::kV)) {
      out.inputs[HeadInput::kV] = concat_->encode(tape, words[N - 1]).summary;
    }
    if (word_att_) {
      Var queries;
      if (ce.empty.back()) {
        queries = tape.constant(Tensor(Shape{0, 2 * d_h}));
      } else {
        std::vector<std::size_t> rows;
        for (std::size_t p = ce.start.back(); p <= ce.end.back(); ++p) rows.push_back(p);
        queries = gather_rows(ce.states, rows);
      }
      WordAttentionOutput wa = word_att_->attend(tape, queries, ce.states);
      out.inputs[HeadInput::kWordAtt] = wa.vector;
      out.word_weights = std::move(wa.weights);
    }
    for (std::size_t k = 0; k < N; ++k)
      if (!window.slots[k].pad) attended.push_back(ce.segments[k]);
  }

  if (utt_att_) {
    UtteranceAttentionOutput ua =
        miobs::utterance_attention(tape, *utt_att_, config_.utterance_attention, attended);
    out.inputs[HeadInput::kSelfAtt] = ua.context;
    out.utterance_weights = std::move(ua.weights);
  }

  std::vector<Var> xs;
  for (HeadInput h : config_.head_inputs) xs.push_back(out.inputs.at(h));
  if (spec.task == Task::kForecast) {
    if (!window.next_speaker) throw ContractError("forecast window has no next speaker");
    xs[0] = concat({xs[0], embedder_->speaker(tape, *window.next_speaker)});
  }
  const auto& mlps = heads_[task];
  if (config_.scoring == Scoring::kConcat) {
    Var x = xs.size() == 1 ? xs[0] : concat(xs);
    out.logits = run_mlp(tape, mlps[0], x, train, rng);
  } else {
    out.logits = run_mlp(tape, mlps[0], xs[0], train, rng);
    for (std::size_t i = 1; i < xs.size(); ++i)
      out.logits = add(out.logits, run_mlp(tape, mlps[i], xs[i], train, rng));
  }
  out.probs = softmax(out.logits);
  return out;
}

std::vector<double> Model::predict(const Window& window, std::size_t task) const {
  Tape tape;
  Output o = forward(tape, window, task, false, nullptr);
  return o.probs.value().values();
}

std::vector<double> Model::forecast(const Window& history, Speaker next,
                                    std::size_t task) const {
  if (tasks_.at(task).task != Task::kForecast) {
    throw ContractError("task " + task_name(tasks_[task]) + " is not a forecast task");
  }
  Window w = history;
  w.next_speaker = next;
  return predict(w, task);
}

}  // namespace miobs
