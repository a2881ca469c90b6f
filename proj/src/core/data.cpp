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

#include "core/data.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <unordered_map>

#include "core/embed.h"
#include "core/error.h"
#include "json.hpp"

namespace miobs {

namespace {

using json = nlohmann::json;

std::string location(const std::string& origin, std::size_t line) {
  return origin + ":" + std::to_string(line);
}

Session parse_session(const json& j, const std::string& where) {
  if (!j.is_object()) throw ParseError(where + ": record is not an object");
  Session s;
  auto id = j.find("session_id");
  if (id == j.end()) throw ParseError(where + ": missing session_id");
  s.id = id->is_string() ? id->get<std::string>() : id->dump();
  auto utts = j.find("utterances");
  if (utts == j.end() || !utts->is_array()) {
    throw ParseError(where + ": missing utterances array");
  }
  if (utts->empty()) throw ParseError(where + ": session '" + s.id + "' has no utterances");
  for (std::size_t i = 0; i < utts->size(); ++i) {
    const json& u = (*utts)[i];
    const std::string at = where + ": utterance " + std::to_string(i);
    if (!u.is_object()) throw ParseError(at + " is not an object");
    Utterance out;
    const std::string spk = u.value("speaker", std::string());
    auto speaker = parse_speaker(spk);
    if (!speaker) throw ParseError(at + ": unknown speaker '" + spk + "'");
    out.speaker = *speaker;
    out.text = u.value("text", std::string());
    if (auto l = u.find("label"); l != u.end() && !l->is_null()) {
      const std::string code = l->get<std::string>();
      auto role = role_of_code(code);
      if (!role) throw ParseError(at + ": unknown label '" + code + "'");
      if (*role != out.speaker) {
        throw ParseError(at + ": label '" + code + "' does not belong to speaker " +
                         std::string(to_string(out.speaker)));
      }
      out.label = code;
    }
    s.utterances.push_back(std::move(out));
  }
  return s;
}

}  // namespace

Corpus parse_corpus(const std::string& text, const std::string& origin) {
  Corpus corpus;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::parse_error& e) {
      throw ParseError(location(origin, lineno) + ": " + e.what());
    }
    try {
      corpus.push_back(parse_session(j, location(origin, lineno)));
    } catch (const json::exception& e) {
      throw ParseError(location(origin, lineno) + ": " + e.what());
    }
  }
  return corpus;
}

Corpus load_corpus(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open corpus '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_corpus(ss.str(), path);
}

std::string serialize_corpus(const Corpus& corpus) {
  std::string out;
  for (const Session& s : corpus) {
    nlohmann::ordered_json j;
    j["session_id"] = s.id;
    auto& utts = j["utterances"] = nlohmann::ordered_json::array();
    for (const Utterance& u : s.utterances) {
      nlohmann::ordered_json ju;
      ju["speaker"] = std::string(to_string(u.speaker));
      ju["text"] = u.text;
      if (u.label) ju["label"] = *u.label;
      utts.push_back(std::move(ju));
    }
    out += j.dump();
    out += '\n';
  }
  return out;
}

void save_corpus(const Corpus& corpus, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write corpus '" + path + "'");
  out << serialize_corpus(corpus);
  if (!out) throw IoError("write failed for '" + path + "'");
}

// ---- windows ----------------------------------------------------------------

Window make_window(const std::vector<Utterance>& history, std::size_t end,
                   std::size_t n) {
  if (n == 0) throw ContractError("window size must be >= 1");
  if (end >= history.size()) throw ContractError("window anchor outside history");
  Window w;
  w.anchor = end;
  w.slots.resize(n);
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t back = n - 1 - k;  // distance from the anchor
    Slot& slot = w.slots[k];
    if (back <= end) {
      const Utterance& u = history[end - back];
      slot.speaker = u.speaker;
      slot.tokens = tokenize(u.text);
    } else {
      slot.pad = true;
    }
  }
  // Pads alternate speakers backwards from the first real slot.
  for (std::size_t k = n; k-- > 0;) {
    if (w.slots[k].pad) {
      w.slots[k].speaker = w.slots[k + 1].speaker == Speaker::kClient
                               ? Speaker::kTherapist
                               : Speaker::kClient;
    }
  }
  return w;
}

std::vector<Window> make_windows(const Session& session, std::size_t n, Task task,
                                 Speaker role) {
  const auto& utts = session.utterances;
  const LabelSet& labels = LabelSet::For(role);
  std::vector<Window> out;
  auto attach = [&](Window w, const Utterance& target) {
    if (target.label) w.label = labels.index(*target.label);
    w.session_id = session.id;
    out.push_back(std::move(w));
  };
  if (task == Task::kCategorize) {
    for (std::size_t i = 0; i < utts.size(); ++i) {
      if (utts[i].speaker == role) attach(make_window(utts, i, n), utts[i]);
    }
  } else {
    for (std::size_t i = 0; i + 1 < utts.size(); ++i) {
      if (utts[i + 1].speaker != role) continue;
      Window w = make_window(utts, i, n);
      w.next_speaker = role;
      attach(std::move(w), utts[i + 1]);
    }
  }
  return out;
}

std::vector<Window> make_windows(const Corpus& corpus, std::size_t n, Task task,
                                 Speaker role) {
  std::vector<Window> out;
  for (const Session& s : corpus) {
    auto w = make_windows(s, n, task, role);
    out.insert(out.end(), std::make_move_iterator(w.begin()),
               std::make_move_iterator(w.end()));
  }
  return out;
}

Split split_sessions(const Corpus& corpus, double dev_fraction, double test_fraction,
                     std::uint64_t seed) {
  if (dev_fraction < 0 || test_fraction < 0 || dev_fraction + test_fraction >= 1.0) {
    throw ConfigError("split fractions must be >= 0 and sum below 1");
  }
  std::vector<std::size_t> order(corpus.size());
  std::iota(order.begin(), order.end(), 0);
  Rng rng(seed);
  rng.shuffle(order.begin(), order.end());
  const auto n = static_cast<double>(corpus.size());
  const auto n_dev = static_cast<std::size_t>(std::llround(n * dev_fraction));
  const auto n_test = static_cast<std::size_t>(std::llround(n * test_fraction));
  Split s;
  for (std::size_t i = 0; i < order.size(); ++i) {
    const Session& sess = corpus[order[i]];
    if (i < n_dev) {
      s.dev.push_back(sess);
    } else if (i < n_dev + n_test) {
      s.test.push_back(sess);
    } else {
      s.train.push_back(sess);
    }
  }
  return s;
}

// ---- synthetic corpus -------------------------------------------------------

namespace {

struct CodeSpec {
  std::string code;
  std::vector<std::string> keywords;
};

const std::vector<CodeSpec>& code_specs() {
  static const std::vector<CodeSpec> specs = {
      {"Fn", {"weather", "tuesday", "groceries", "commute"}},
      {"Ct", {"quit", "change", "ready", "better"}},
      {"St", {"enjoy", "cannot", "relax", "never"}},
      {"Fa", {"hello", "welcome", "thanks", "goodbye"}},
      {"Res", {"sounds", "hear", "saying", "feel"}},
      {"Rec", {"wondering", "torn", "underneath", "balance"}},
      {"Gi", {"research", "studies", "nicotine", "doctor"}},
      {"Quc", {"yes", "many", "often", "did"}},
      {"Quo", {"how", "what", "tell", "describe"}},
      {"Mia", {"strength", "effort", "choice", "proud"}},
      {"Min", {"must", "should", "warn", "wrong"}},
  };
  return specs;
}

const std::vector<std::string>& fillers() {
  static const std::vector<std::string> f = {
      "i", "you", "the", "a", "it", "that", "and", "so", "really", "just", "about", "my"};
  return f;
}

}  // namespace

const std::vector<std::string>& synthetic_codes() {
  static const std::vector<std::string> codes = [] {
    std::vector<std::string> c;
    for (const auto& s : code_specs()) c.push_back(s.code);
    return c;
  }();
  return codes;
}

const std::vector<std::vector<double>>& synthetic_transitions() {
  //                 Fn    Ct    St    Fa    Res   Rec   Gi    Quc   Quo   Mia   Min
  static const std::vector<std::vector<double>> t = {
      /* Fn  */ {0.05, 0.00, 0.00, 0.30, 0.10, 0.00, 0.20, 0.20, 0.15, 0.00, 0.00},
      /* Ct  */ {0.00, 0.05, 0.00, 0.00, 0.20, 0.50, 0.00, 0.00, 0.10, 0.15, 0.00},
      /* St  */ {0.00, 0.00, 0.10, 0.00, 0.35, 0.20, 0.00, 0.00, 0.15, 0.00, 0.20},
      /* Fa  */ {0.70, 0.10, 0.10, 0.00, 0.00, 0.00, 0.10, 0.00, 0.00, 0.00, 0.00},
      /* Res */ {0.30, 0.40, 0.30, 0.00, 0.00, 0.00, 0.00, 0.00, 0.00, 0.00, 0.00},
      /* Rec */ {0.30, 0.50, 0.20, 0.00, 0.00, 0.00, 0.00, 0.00, 0.00, 0.00, 0.00},
      /* Gi  */ {0.60, 0.00, 0.00, 0.20, 0.00, 0.00, 0.00, 0.20, 0.00, 0.00, 0.00},
      /* Quc */ {0.70, 0.15, 0.15, 0.00, 0.00, 0.00, 0.00, 0.00, 0.00, 0.00, 0.00},
      /* Quo */ {0.25, 0.40, 0.35, 0.00, 0.00, 0.00, 0.00, 0.00, 0.00, 0.00, 0.00},
      /* Mia */ {0.30, 0.60, 0.10, 0.00, 0.00, 0.00, 0.00, 0.00, 0.00, 0.00, 0.00},
      /* Min */ {0.30, 0.10, 0.60, 0.00, 0.00, 0.00, 0.00, 0.00, 0.00, 0.00, 0.00},
  };
  return t;
}

std::vector<double> synthetic_stationary() {
  const auto& t = synthetic_transitions();
  const std::size_t n = t.size();
  std::vector<double> pi(n, 1.0 / static_cast<double>(n)), next(n);
  for (int it = 0; it < 10000; ++it) {
    std::fill(next.begin(), next.end(), 0.0);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) next[j] += pi[i] * t[i][j];
    double diff = 0.0;
    for (std::size_t j = 0; j < n; ++j) diff = std::max(diff, std::abs(next[j] - pi[j]));
    pi.swap(next);
    if (diff < 1e-15) break;
  }
  return pi;
}

namespace {

std::size_t draw(Rng& rng, const std::vector<double>& p) {
  double u = rng.uniform();
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (u < p[i]) return i;
    u -= p[i];
  }
  // Rounding slack lands on the last positive entry.
  for (std::size_t i = p.size(); i-- > 0;)
    if (p[i] > 0) return i;
  return 0;
}

}  // namespace

Corpus gen_synthetic(const SyntheticConfig& cfg) {
  if (cfg.min_length == 0 || cfg.min_length > cfg.max_length) {
    throw ConfigError("synthetic session length range is empty");
  }
  if (cfg.min_words == 0 || cfg.min_words > cfg.max_words) {
    throw ConfigError("synthetic utterance length range is empty");
  }
  Rng rng(cfg.seed);
  const auto& specs = code_specs();
  const auto& trans = synthetic_transitions();
  const auto stationary = synthetic_stationary();
  Corpus corpus;
  for (std::size_t s = 0; s < cfg.sessions; ++s) {
    Session sess;
    sess.id = "syn-" + std::to_string(cfg.seed) + "-" + std::to_string(s);
    const std::size_t len = cfg.min_length + rng.below(cfg.max_length - cfg.min_length + 1);
    std::size_t code = draw(rng, stationary);
    for (std::size_t i = 0; i < len; ++i) {
      if (i > 0) code = draw(rng, trans[code]);
      const CodeSpec& spec = specs[code];
      const std::size_t words = cfg.min_words + rng.below(cfg.max_words - cfg.min_words + 1);
      const std::size_t key_at = rng.below(words);
      std::string text;
      for (std::size_t w = 0; w < words; ++w) {
        if (w) text += ' ';
        text += w == key_at ? spec.keywords[rng.below(spec.keywords.size())]
                            : fillers()[rng.below(fillers().size())];
      }
      Utterance u;
      u.speaker = *role_of_code(spec.code);
      u.text = std::move(text);
      u.label = spec.code;
      sess.utterances.push_back(std::move(u));
    }
    corpus.push_back(std::move(sess));
  }
  return corpus;
}

std::optional<std::string> oracle_label(const std::string& text) {
  static const std::unordered_map<std::string, std::string> by_keyword = [] {
    std::unordered_map<std::string, std::string> m;
    for (const auto& s : code_specs())
      for (const auto& k : s.keywords) m.emplace(k, s.code);
    return m;
  }();
  for (const std::string& tok : tokenize(text)) {
    if (auto it = by_keyword.find(tok); it != by_keyword.end()) return it->second;
  }
  return std::nullopt;
}

}  // namespace miobs
