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

#include "core/train.h"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>
#include <sstream>

#include "core/error.h"
#include "core/loss.h"

namespace miobs {

std::string_view to_string(MtlMode m) {
  switch (m) {
    case MtlMode::kSingle: return "single";
    case MtlMode::kJoint: return "joint";
    case MtlMode::kAlternateAnno: return "ct_anno";
    case MtlMode::kAlternateFore: return "ct_fore";
    case MtlMode::kAll: return "ct_all";
  }
  return "single";
}

MtlMode parse_mtl_mode(std::string_view s) {
  for (MtlMode m : {MtlMode::kSingle, MtlMode::kJoint, MtlMode::kAlternateAnno,
                    MtlMode::kAlternateFore, MtlMode::kAll}) {
    if (s == to_string(m)) return m;
  }
  throw ConfigError("unknown mtl mode '" + std::string(s) +
                    "' (single, joint, ct_anno, ct_fore, ct_all)");
}

// ---- config -----------------------------------------------------------------

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

double to_double(std::string_view key, const std::string& v) {
  try {
    std::size_t used = 0;
    double d = std::stod(v, &used);
    if (used == v.size()) return d;
  } catch (const std::logic_error&) {
  }
  throw ConfigError(std::string(key) + ": expected a number, got '" + v + "'");
}

std::uint64_t to_uint(std::string_view key, const std::string& v) {
  try {
    std::size_t used = 0;
    if (!v.empty() && v[0] != '-') {
      unsigned long long d = std::stoull(v, &used);
      if (used == v.size()) return d;
    }
  } catch (const std::logic_error&) {
  }
  throw ConfigError(std::string(key) + ": expected a non-negative integer, got '" + v + "'");
}

}  // namespace

bool TrainConfig::set(std::string_view key, std::string_view raw) {
  const std::string v = trim(raw);
  if (key == "lr") {
    lr = to_double(key, v);
  } else if (key == "clip") {
    clip = to_double(key, v);
  } else if (key == "batch") {
    batch = to_uint(key, v);
  } else if (key == "epochs") {
    epochs = to_uint(key, v);
  } else if (key == "patience") {
    patience = to_uint(key, v);
  } else if (key == "seed") {
    seed = to_uint(key, v);
  } else if (key == "mtl") {
    mtl = parse_mtl_mode(v);
  } else if (key == "dev_fraction") {
    dev_fraction = to_double(key, v);
  } else if (key == "test_fraction") {
    test_fraction = to_double(key, v);
  } else {
    return false;
  }
  return true;
}

void TrainConfig::validate() const {
  if (!(lr > 0.0)) throw ConfigError("lr must be positive");
  if (!(clip > 0.0)) throw ConfigError("clip must be positive");
  if (batch == 0) throw ConfigError("batch must be >= 1");
  if (epochs == 0) throw ConfigError("epochs must be >= 1");
  if (dev_fraction < 0 || test_fraction < 0 || dev_fraction + test_fraction >= 1.0) {
    throw ConfigError("dev_fraction and test_fraction must be >= 0 and sum below 1");
  }
}

nlohmann::ordered_json TrainConfig::to_json() const {
  nlohmann::ordered_json j;
  j["lr"] = lr;
  j["clip"] = clip;
  j["batch"] = batch;
  j["epochs"] = epochs;
  j["patience"] = patience;
  j["seed"] = seed;
  j["mtl"] = std::string(to_string(mtl));
  j["dev_fraction"] = dev_fraction;
  j["test_fraction"] = test_fraction;
  return j;
}

TrainConfig TrainConfig::FromJson(const nlohmann::json& j) {
  TrainConfig c;
  try {
    c.lr = j.at("lr").get<double>();
    c.clip = j.at("clip").get<double>();
    c.batch = j.at("batch").get<std::size_t>();
    c.epochs = j.at("epochs").get<std::size_t>();
    c.patience = j.at("patience").get<std::size_t>();
    c.seed = j.at("seed").get<std::uint64_t>();
    c.mtl = parse_mtl_mode(j.at("mtl").get<std::string>());
    c.dev_fraction = j.at("dev_fraction").get<double>();
    c.test_fraction = j.at("test_fraction").get<double>();
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("train config: ") + e.what());
  }
  return c;
}

MtlSchedule MtlSchedule::For(MtlMode mode, const TaskSpec& primary) {
  const Speaker C = Speaker::kClient, T = Speaker::kTherapist;
  const Task cat = Task::kCategorize, fore = Task::kForecast;
  MtlSchedule s;
  s.mode = mode;
  switch (mode) {
    case MtlMode::kSingle:
      s.tasks = {primary};
      s.groups = {{0}};
      break;
    case MtlMode::kJoint:
      s.tasks = {{cat, primary.role}, {fore, primary.role}};
      s.groups = {{0, 1}};
      break;
    case MtlMode::kAlternateAnno:
      s.tasks = {{cat, C}, {cat, T}};
      s.groups = {{0}, {1}};
      break;
    case MtlMode::kAlternateFore:
      s.tasks = {{fore, C}, {fore, T}};
      s.groups = {{0}, {1}};
      break;
    case MtlMode::kAll:
      s.tasks = {{cat, C}, {fore, C}, {cat, T}, {fore, T}};
      s.groups = {{0, 1}, {2, 3}};
      break;
  }
  s.primary_index(primary);
  return s;
}

std::size_t MtlSchedule::primary_index(const TaskSpec& primary) const {
  for (std::size_t i = 0; i < tasks.size(); ++i)
    if (tasks[i] == primary) return i;
  throw ConfigError("mtl mode " + std::string(to_string(mode)) + " does not train " +
                    task_name(primary));
}

// ---- optimizer --------------------------------------------------------------

void adam_step(const std::vector<Parameter*>& params, AdamState& st, double lr) {
  if (st.m.size() != params.size()) {
    st.m.clear();
    st.v.clear();
    for (const Parameter* p : params) {
      st.m.emplace_back(p->value.shape());
      st.v.emplace_back(p->value.shape());
    }
  }
  ++st.step;
  const double t = static_cast<double>(st.step);
  const double c1 = 1.0 - std::pow(st.beta1, t);
  const double c2 = 1.0 - std::pow(st.beta2, t);
  for (std::size_t i = 0; i < params.size(); ++i) {
    Parameter& p = *params[i];
    if (!(st.m[i].shape() == p.value.shape())) throw ContractError("adam state shape mismatch for " + p.name);
    auto g = p.grad.data();
    auto w = p.value.data();
    auto m = st.m[i].data();
    auto v = st.v[i].data();
    const std::size_t skip = p.zero_first_row ? p.value.cols() : 0;
    for (std::size_t k = skip; k < w.size(); ++k) {
      m[k] = st.beta1 * m[k] + (1.0 - st.beta1) * g[k];
      v[k] = st.beta2 * v[k] + (1.0 - st.beta2) * g[k] * g[k];
      const double mhat = m[k] / c1;
      const double vhat = v[k] / c2;
      w[k] -= lr * mhat / (std::sqrt(vhat) + st.eps);
    }
  }
}

double global_norm(const std::vector<Parameter*>& params) {
  double s = 0.0;
  for (const Parameter* p : params)
    for (double g : p->grad.data()) s += g * g;
  return std::sqrt(s);
}

double clip_global_norm(const std::vector<Parameter*>& params, double max_norm) {
  if (!(max_norm > 0.0)) throw ConfigError("clip norm must be positive");
  const double norm = global_norm(params);
  if (norm > max_norm) {
    const double f = max_norm / norm;
    for (Parameter* p : params)
      for (double& g : p->grad.data()) g *= f;
  }
  return norm;
}

// ---- fitting ----------------------------------------------------------------

nlohmann::ordered_json EpochLog::to_json() const {
  nlohmann::ordered_json j;
  j["epoch"] = epoch;
  j["train_loss"] = train_loss;
  j["grad_norm"] = grad_norm;
  j["steps"] = steps;
  j["dev_macro_f1"] = dev_macro_f1;
  j["dev_metric"] = dev_metric;
  j["improved"] = improved;
  j["seconds"] = seconds;
  return j;
}

std::vector<std::vector<Window>> task_windows(const Model& model, const Corpus& corpus) {
  std::vector<std::vector<Window>> out;
  for (const TaskSpec& t : model.tasks()) {
    std::vector<Window> all = make_windows(corpus, model.config().window, t.task, t.role);
    std::vector<Window> labelled;
    for (auto& w : all)
      if (w.label) labelled.push_back(std::move(w));
    out.push_back(std::move(labelled));
  }
  return out;
}

std::vector<std::vector<double>> predict_all(const Model& model,
                                             const std::vector<Window>& windows,
                                             std::size_t task) {
  std::vector<std::vector<double>> out;
  out.reserve(windows.size());
  for (const Window& w : windows) out.push_back(model.predict(w, task));
  return out;
}

EvalReport evaluate(const Model& model, const std::vector<Window>& windows, std::size_t task,
                    std::size_t k) {
  std::vector<std::size_t> gold;
  for (const Window& w : windows) {
    if (!w.label) throw ContractError("evaluation window without a label");
    gold.push_back(*w.label);
  }
  return make_report(model.labels(task).codes(), predict_all(model, windows, task), gold, k);
}

std::unique_ptr<Model> build_model(const ModelConfig& config, const MtlSchedule& schedule,
                                   const Corpus& train, std::uint64_t seed) {
  std::vector<std::vector<std::string>> streams;
  for (const Session& s : train)
    for (const Utterance& u : s.utterances) streams.push_back(tokenize(u.text));
  Vocab vocab = Vocab::Build(streams, config.min_count);
  if (config.vectors.empty()) {
    return std::make_unique<Model>(config, std::move(vocab), seed, schedule.tasks);
  }
  Rng rng = ParameterStore(seed).stream("embed.vectors");
  Tensor init = load_static_vectors(config.vectors, vocab, rng);
  if (init.cols() != config.d_w) {
    throw ConfigError("vector file width " + std::to_string(init.cols()) + " differs from d_w " +
                      std::to_string(config.d_w));
  }
  return std::make_unique<Model>(config, std::move(vocab), seed, schedule.tasks, &init);
}

namespace {

// Cycles through a shuffled index list, reshuffling on each wrap.
class Cursor {
 public:
  explicit Cursor(std::size_t n) : order_(n) { std::iota(order_.begin(), order_.end(), 0); }
  void reshuffle(Rng& rng) {
    rng.shuffle(order_.begin(), order_.end());
    pos_ = 0;
  }
  std::vector<std::size_t> take(std::size_t count, Rng& rng) {
    std::vector<std::size_t> out;
    while (out.size() < count && !order_.empty()) {
      if (pos_ == order_.size()) reshuffle(rng);
      out.push_back(order_[pos_++]);
      if (pos_ == order_.size() && out.size() < count) break;
    }
    return out;
  }

 private:
  std::vector<std::size_t> order_;
  std::size_t pos_ = 0;
};

std::string nonfinite_report(const std::vector<Parameter*>& params) {
  std::string names;
  for (const Parameter* p : params) {
    const double n = std::sqrt(std::accumulate(p->grad.data().begin(), p->grad.data().end(), 0.0,
                                               [](double a, double g) { return a + g * g; }));
    if (!std::isfinite(n)) names += (names.empty() ? "" : ", ") + p->name;
  }
  return names.empty() ? "none" : names;
}

}  // namespace

FitResult fit(Model& model, const Corpus& train, const Corpus& dev, const TrainConfig& cfg,
              const MtlSchedule& schedule, const EpochCallback& on_epoch) {
  cfg.validate();
  if (schedule.tasks != model.tasks()) {
    throw ContractError("model tasks do not match the training schedule");
  }
  const auto train_w = task_windows(model, train);
  const auto dev_w = task_windows(model, dev);
  for (std::size_t t = 0; t < train_w.size(); ++t) {
    if (train_w[t].empty()) {
      throw Error(ErrorCode::kTraining, "no labelled training windows for " +
                                            task_name(model.tasks()[t]));
    }
  }

  std::vector<FocalConfig> losses;
  for (const TaskSpec& t : model.tasks()) losses.push_back(model.config().loss_for(t.role));

  Rng rng(cfg.seed);
  std::vector<Cursor> cursors;
  std::size_t rounds = 0;
  for (const auto& w : train_w) {
    cursors.emplace_back(w.size());
    cursors.back().reshuffle(rng);
    rounds = std::max(rounds, (w.size() + cfg.batch - 1) / cfg.batch);
  }

  std::vector<Parameter*> params = model.parameters().all();
  AdamState adam;
  FitResult result;
  std::vector<Tensor> best;
  std::size_t bad_epochs = 0;
  double last_norm = 0.0;

  for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
    const auto started = std::chrono::steady_clock::now();
    EpochLog log;
    log.epoch = epoch;
    double loss_sum = 0.0, norm_sum = 0.0;
    for (std::size_t round = 0; round < rounds; ++round) {
      for (const auto& group : schedule.groups) {
        model.parameters().zero_grad();
        Tape tape;
        Var total;
        for (std::size_t t : group) {
          const auto batch = cursors[t].take(cfg.batch, rng);
          Var task_loss;
          for (std::size_t i : batch) {
            const Window& w = train_w[t][i];
            Model::Output o = model.forward(tape, w, t, true, &rng);
            Var l = focal_loss(o.probs, *w.label, losses[t]);
            task_loss = task_loss.valid() ? add(task_loss, l) : l;
          }
          task_loss = scale(task_loss, 1.0 / static_cast<double>(batch.size()));
          total = total.valid() ? add(total, task_loss) : task_loss;
        }
        const double value = total.value().item();
        if (!std::isfinite(value)) {
          throw Error(ErrorCode::kTraining,
                      "non-finite loss at epoch " + std::to_string(epoch) + ", batch " +
                          std::to_string(round) + "; previous grad norm " +
                          std::to_string(last_norm));
        }
        tape.backward(total);
        const double norm = clip_global_norm(params, cfg.clip);
        if (!std::isfinite(norm)) {
          throw Error(ErrorCode::kTraining,
                      "non-finite gradient at epoch " + std::to_string(epoch) + ", batch " +
                          std::to_string(round) + "; affected parameters: " +
                          nonfinite_report(params));
        }
        last_norm = norm;
        adam_step(params, adam, cfg.lr);
        loss_sum += value;
        norm_sum += norm;
        ++log.steps;
      }
    }
    log.train_loss = loss_sum / static_cast<double>(std::max<std::size_t>(log.steps, 1));
    log.grad_norm = norm_sum / static_cast<double>(std::max<std::size_t>(log.steps, 1));
    for (std::size_t t = 0; t < dev_w.size(); ++t) {
      double f1 = 0.0;
      if (!dev_w[t].empty()) f1 = evaluate(model, dev_w[t], t, 1).macro_f1;
      log.dev_macro_f1.push_back(f1);
    }
    log.dev_metric = std::accumulate(log.dev_macro_f1.begin(), log.dev_macro_f1.end(), 0.0) /
                     static_cast<double>(log.dev_macro_f1.size());
    log.improved = log.dev_metric > result.best_metric;
    if (log.improved) {
      result.best_metric = log.dev_metric;
      result.best_epoch = epoch;
      best.clear();
      for (const Parameter* p : params) best.push_back(p->value);
      bad_epochs = 0;
    } else {
      ++bad_epochs;
    }
    log.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    result.log.push_back(log);
    if (on_epoch) on_epoch(log);
    if (bad_epochs > cfg.patience) {
      result.stopped_early = true;
      break;
    }
  }
  for (std::size_t i = 0; i < best.size(); ++i) params[i]->value = best[i];
  result.rng_state = rng.state();
  return result;
}

// ---- checkpoints ------------------------------------------------------------

namespace {

constexpr char kMagic[8] = {'M', 'I', 'O', 'B', 'S', 'C', 'K', 'P'};
constexpr std::uint32_t kVersion = 1;

template <typename T>
void put(std::string& out, T v) {
  char buf[sizeof(T)];
  std::memcpy(buf, &v, sizeof(T));
  out.append(buf, sizeof(T));
}

class Reader {
 public:
  Reader(const std::string& bytes, const std::string& origin) : b_(bytes), origin_(origin) {}
  template <typename T>
  T get() {
    need(sizeof(T));
    T v;
    std::memcpy(&v, b_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return v;
  }
  std::string bytes(std::size_t n) {
    need(n);
    std::string s = b_.substr(pos_, n);
    pos_ += n;
    return s;
  }
  bool done() const { return pos_ == b_.size(); }

 private:
  void need(std::size_t n) {
    if (b_.size() - pos_ < n) throw ParseError(origin_ + ": truncated checkpoint");
  }
  const std::string& b_;
  std::string origin_;
  std::size_t pos_ = 0;
};

}  // namespace

std::string checkpoint_bytes(const Model& model, const CheckpointMeta& meta) {
  nlohmann::ordered_json j;
  j["model"] = model.config().to_json();
  j["train"] = meta.train.to_json();
  auto& tasks = j["tasks"] = nlohmann::ordered_json::array();
  for (const TaskSpec& t : model.tasks()) {
    tasks.push_back({{"task", std::string(to_string(t.task))},
                     {"role", std::string(role_name(t.role))}});
  }
  j["seed"] = model.seed();
  j["rng_state"] = meta.rng_state;
  j["best_metric"] = meta.best_metric;
  j["best_epoch"] = meta.best_epoch;
  j["vocab"] = model.vocab().tokens();
  const std::string text = j.dump();

  std::string out(kMagic, sizeof(kMagic));
  put<std::uint32_t>(out, kVersion);
  put<std::uint64_t>(out, text.size());
  out += text;
  const auto params = model.parameters().all();
  put<std::uint32_t>(out, static_cast<std::uint32_t>(params.size()));
  for (const Parameter* p : params) {
    put<std::uint32_t>(out, static_cast<std::uint32_t>(p->name.size()));
    out += p->name;
    const Shape& s = p->value.shape();
    put<std::uint8_t>(out, static_cast<std::uint8_t>(s.rank()));
    for (std::size_t d = 0; d < s.rank(); ++d) put<std::uint64_t>(out, s[d]);
    for (double v : p->value.data()) put<double>(out, v);
  }
  return out;
}

void save_checkpoint(const Model& model, const CheckpointMeta& meta, const std::string& path) {
  const std::string bytes = checkpoint_bytes(model, meta);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write checkpoint '" + path + "'");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write failed for '" + path + "'");
}

LoadedCheckpoint parse_checkpoint(const std::string& bytes, const std::string& origin) {
  Reader r(bytes, origin);
  if (r.bytes(sizeof(kMagic)) != std::string(kMagic, sizeof(kMagic))) {
    throw ParseError(origin + ": not a checkpoint file");
  }
  const auto version = r.get<std::uint32_t>();
  if (version != kVersion) {
    throw ParseError(origin + ": unsupported checkpoint version " + std::to_string(version));
  }
  const auto meta_len = r.get<std::uint64_t>();
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(r.bytes(meta_len));
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(origin + ": bad metadata: " + e.what());
  }
  LoadedCheckpoint out;
  CheckpointMeta& m = out.meta;
  m.model = ModelConfig::FromJson(j.at("model"));
  m.train = TrainConfig::FromJson(j.at("train"));
  try {
    for (const auto& t : j.at("tasks")) {
      auto task = parse_task(t.at("task").get<std::string>());
      auto role = parse_role(t.at("role").get<std::string>());
      if (!task || !role) throw ParseError(origin + ": bad task entry");
      m.tasks.push_back({*task, *role});
    }
    m.seed = j.at("seed").get<std::uint64_t>();
    m.rng_state = j.at("rng_state").get<std::string>();
    m.best_metric = j.at("best_metric").get<double>();
    m.best_epoch = j.at("best_epoch").get<std::size_t>();
    Vocab vocab = Vocab::FromTokens(j.at("vocab").get<std::vector<std::string>>());
    out.model = std::make_unique<Model>(m.model, std::move(vocab), m.seed, m.tasks);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(origin + ": bad metadata: " + e.what());
  }

  ParameterStore& store = out.model->parameters();
  const auto count = r.get<std::uint32_t>();
  if (count != store.size()) {
    throw ParseError(origin + ": checkpoint has " + std::to_string(count) +
                     " parameters, the configured model has " + std::to_string(store.size()));
  }
  for (std::uint32_t i = 0; i < count; ++i) {
    const std::string name = r.bytes(r.get<std::uint32_t>());
    Parameter* p = store.find(name);
    if (p == nullptr) throw ParseError(origin + ": unknown parameter '" + name + "'");
    const auto rank = r.get<std::uint8_t>();
    if (rank != p->value.rank()) throw ParseError(origin + ": rank mismatch for '" + name + "'");
    for (std::size_t d = 0; d < rank; ++d) {
      if (r.get<std::uint64_t>() != p->value.shape()[d]) {
        throw ParseError(origin + ": shape mismatch for '" + name + "'");
      }
    }
    for (double& v : p->value.data()) v = r.get<double>();
  }
  if (!r.done()) throw ParseError(origin + ": trailing bytes after parameters");
  return out;
}

LoadedCheckpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open checkpoint '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_checkpoint(ss.str(), path);
}

}  // namespace miobs
