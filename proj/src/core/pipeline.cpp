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

#include "core/pipeline.h"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <thread>

#include "core/error.h"
#include "core/wire.h"

namespace miobs {

namespace {

std::vector<Window> labelled(std::vector<Window> windows) {
  std::erase_if(windows, [](const Window& w) { return !w.label; });
  return windows;
}

}  // namespace

TrainOutcome train_run(const RunConfig& cfg, const Corpus& corpus, std::size_t k,
                       const EpochCallback& on_epoch) {
  cfg.model.validate();
  cfg.train.validate();
  const Split split =
      split_sessions(corpus, cfg.train.dev_fraction, cfg.train.test_fraction, cfg.train.seed);
  if (split.train.empty()) throw ContractError("the train split is empty");
  const MtlSchedule schedule = MtlSchedule::For(cfg.train.mtl, cfg.model.primary());

  TrainOutcome out;
  out.model = build_model(cfg.model, schedule, split.train, cfg.train.seed);
  out.fit = fit(*out.model, split.train, split.dev, cfg.train, schedule, on_epoch);
  out.meta.model = cfg.model;
  out.meta.train = cfg.train;
  out.meta.tasks = schedule.tasks;
  out.meta.seed = cfg.train.seed;
  out.meta.rng_state = out.fit.rng_state;
  out.meta.best_metric = out.fit.best_metric;
  out.meta.best_epoch = out.fit.best_epoch;
  out.test = evaluate_corpus(*out.model, split.test, k);
  return out;
}

Corpus select_split(const Corpus& corpus, const CheckpointMeta& meta, const std::string& split) {
  if (split == "all") return corpus;
  Split s = split_sessions(corpus, meta.train.dev_fraction, meta.train.test_fraction,
                           meta.train.seed);
  if (split == "train") return s.train;
  if (split == "dev") return s.dev;
  if (split == "test") return s.test;
  throw ConfigError("split must be all, train, dev or test, got '" + split + "'");
}

EvalReport evaluate_corpus(const Model& model, const Corpus& corpus, std::size_t k) {
  const TaskSpec t = model.config().primary();
  const auto task = model.task_index(t);
  if (!task) throw ContractError("model has no head for " + task_name(t));
  const auto windows = labelled(make_windows(corpus, model.config().window, t.task, t.role));
  return evaluate(model, windows, *task, std::min(k, model.labels(*task).size()));
}

std::vector<nlohmann::ordered_json> predict_records(const Model& model, const Corpus& corpus,
                                                    std::size_t k) {
  const TaskSpec t = model.config().primary();
  const auto task = model.task_index(t);
  if (!task) throw ContractError("model has no head for " + task_name(t));
  const LabelSet& labels = model.labels(*task);
  if (k == 0 || k > labels.size()) {
    throw ConfigError("k must lie in [1, " + std::to_string(labels.size()) + "]");
  }
  std::vector<nlohmann::ordered_json> out;
  for (const Window& w : make_windows(corpus, model.config().window, t.task, t.role)) {
    nlohmann::ordered_json r;
    r["session_id"] = w.session_id;
    r["index"] = w.anchor;
    r["task"] = std::string(to_string(t.task));
    r["speaker"] = std::string(to_string(t.role));
    if (t.task == Task::kCategorize) {
      const std::vector<double> p = model.predict(w, *task);
      r["code"] = labels.code(argmax(p));
      r["distribution"] = distribution_json(labels, p);
    } else {
      const std::vector<double> p = model.forecast(w, t.role, *task);
      r["k"] = k;
      r["top"] = top_k_json(labels, p, k);
      r["warning"] = min_warning(labels, p, k);
      r["distribution"] = distribution_json(labels, p);
    }
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<nlohmann::json> load_jsonl(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "'");
  std::vector<nlohmann::json> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      out.push_back(nlohmann::json::parse(line));
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(path + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return out;
}

EvalReport evaluate_predictions(const Corpus& corpus, const std::vector<nlohmann::json>& records,
                                std::size_t k) {
  if (records.empty()) throw ContractError("no prediction records to evaluate");
  std::map<std::string, const Session*> by_id;
  for (const Session& s : corpus) by_id[s.id] = &s;

  std::optional<Task> task;
  std::optional<Speaker> role;
  std::vector<std::vector<double>> probs;
  std::vector<std::size_t> gold;
  for (std::size_t n = 0; n < records.size(); ++n) {
    const auto& r = records[n];
    const std::string where = "prediction record " + std::to_string(n + 1);
    try {
      const auto t = parse_task(r.at("task").get<std::string>());
      const auto s = parse_speaker(r.at("speaker").get<std::string>());
      if (!t || !s) throw ParseError(where + ": bad task or speaker");
      if (task && (*task != *t || *role != *s)) {
        throw ContractError(where + ": records mix tasks or speaker roles");
      }
      task = t;
      role = s;
      const LabelSet& labels = LabelSet::For(*s);

      const std::string id = r.at("session_id").get<std::string>();
      auto it = by_id.find(id);
      if (it == by_id.end()) throw ContractError(where + ": session '" + id + "' not in corpus");
      const std::size_t target =
          r.at("index").get<std::size_t>() + (*t == Task::kForecast ? 1 : 0);
      const auto& utts = it->second->utterances;
      if (target >= utts.size()) throw ContractError(where + ": index outside the session");
      if (utts[target].speaker != *s) {
        throw ContractError(where + ": target utterance is not spoken by " +
                            std::string(role_name(*s)));
      }
      if (!utts[target].label) throw ContractError(where + ": target utterance has no gold label");

      std::vector<double> p(labels.size(), 0.0);
      if (r.contains("distribution")) {
        for (const auto& [code, v] : r.at("distribution").items()) {
          auto i = labels.index(code);
          if (!i) throw ParseError(where + ": unknown code '" + code + "'");
          p[*i] = v.get<double>();
        }
      } else if (r.contains("top")) {
        for (const auto& e : r.at("top")) {
          auto i = labels.index(e.at("code").get<std::string>());
          if (!i) throw ParseError(where + ": unknown code in top");
          p[*i] = e.at("p").get<double>();
        }
      } else if (r.contains("code")) {
        auto i = labels.index(r.at("code").get<std::string>());
        if (!i) throw ParseError(where + ": unknown code");
        p[*i] = 1.0;
      } else {
        throw ParseError(where + ": needs distribution, top or code");
      }
      probs.push_back(std::move(p));
      gold.push_back(*labels.index(*utts[target].label));
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(where + ": " + e.what());
    }
  }
  const LabelSet& labels = LabelSet::For(*role);
  return make_report(labels.codes(), probs, gold, std::min(k, labels.size()));
}

// ---- ablation ---------------------------------------------------------------

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_on(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep)) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

}  // namespace

void adapt_head_inputs(ModelConfig& c) {
  std::vector<HeadInput> allowed;
  if (c.skeleton == Skeleton::kHgru) {
    allowed = {HeadInput::kH, HeadInput::kV};
  } else if (c.task == Task::kCategorize) {
    allowed = {HeadInput::kSeg, HeadInput::kV};
    if (c.word_attention != WordAttentionKind::kNone) allowed.push_back(HeadInput::kWordAtt);
  } else {
    allowed = {HeadInput::kC, HeadInput::kV};
  }
  if (c.utterance_attention != UtteranceAttentionKind::kNone) {
    allowed.push_back(HeadInput::kSelfAtt);
  }
  std::erase_if(c.head_inputs, [&](HeadInput h) {
    return std::find(allowed.begin(), allowed.end(), h) == allowed.end();
  });
  if (c.head_inputs.empty()) c.head_inputs = {allowed.front()};
}

AblationGrid parse_grid(const std::string& text) {
  AblationGrid grid;
  for (const std::string& part : split_on(text, ';')) {
    const auto eq = part.find('=');
    if (eq == std::string::npos) throw ConfigError("grid axis '" + part + "' needs axis=v1,v2");
    const std::string axis = trim(std::string_view(part).substr(0, eq));
    static const std::vector<std::string> kAxes = {"window", "skeleton", "word_attention",
                                                   "utterance_attention"};
    if (std::find(kAxes.begin(), kAxes.end(), axis) == kAxes.end()) {
      throw ConfigError("unknown ablation axis '" + axis +
                        "' (window, skeleton, word_attention, utterance_attention)");
    }
    auto values = split_on(part.substr(eq + 1), ',');
    if (values.empty()) throw ConfigError("grid axis '" + axis + "' lists no values");
    grid.emplace_back(axis, std::move(values));
  }
  if (grid.empty()) throw ConfigError("empty ablation grid");
  return grid;
}

std::vector<AblationRow> ablate(const RunConfig& base, const Corpus& corpus,
                                const AblationGrid& grid, std::size_t k, std::size_t threads) {
  struct Cell {
    RunConfig cfg;
    AblationRow row;
  };
  std::vector<Cell> cells;
  for (const auto& [axis, values] : grid) {
    for (const std::string& value : values) {
      Cell cell{base, {}};
      cell.row.axis = axis;
      cell.row.value = value;
      if (axis == "window") {
        cell.cfg.set("window", value == "0" ? "1" : value);
      } else {
        cell.cfg.set(axis, value);
      }
      adapt_head_inputs(cell.cfg.model);
      cell.cfg.model.validate();
      cells.push_back(std::move(cell));
    }
  }

  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(cells.size());
  auto worker = [&] {
    for (std::size_t i = next++; i < cells.size(); i = next++) {
      try {
        TrainOutcome o = train_run(cells[i].cfg, corpus, k);
        cells[i].row.dev_macro_f1 = o.fit.best_metric;
        cells[i].row.test_macro_f1 = o.test.macro_f1;
        cells[i].row.test_recall_at_k = o.test.recall_at_k;
        cells[i].row.best_epoch = o.fit.best_epoch;
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const std::size_t n = std::clamp<std::size_t>(threads, 1, cells.size());
  std::vector<std::jthread> pool;
  for (std::size_t i = 1; i < n; ++i) pool.emplace_back(worker);
  worker();
  pool.clear();
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);

  std::vector<AblationRow> rows;
  for (auto& c : cells) rows.push_back(std::move(c.row));
  return rows;
}

std::string ablation_table(const std::vector<AblationRow>& rows, std::size_t k) {
  std::ostringstream out;
  out << "| axis | value | dev macro F1 | test macro F1 | test recall@" << k
      << " | best epoch |\n|---|---|---|---|---|---|\n";
  char buf[128];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof(buf), "| %.4f | %.4f | %.4f | %zu |\n", r.dev_macro_f1,
                  r.test_macro_f1, r.test_recall_at_k, r.best_epoch);
    out << "| " << r.axis << " | " << r.value << " " << buf;
  }
  return out.str();
}

}  // namespace miobs
