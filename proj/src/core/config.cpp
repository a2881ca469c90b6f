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

#include "core/config.h"

#include <fstream>
#include <sstream>

#include "core/error.h"

namespace miobs {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

std::size_t to_size(std::string_view key, const std::string& v) {
  try {
    std::size_t used = 0;
    if (!v.empty() && v[0] != '-') {
      unsigned long long n = std::stoull(v, &used);
      if (used == v.size()) return static_cast<std::size_t>(n);
    }
  } catch (const std::logic_error&) {
  }
  throw ConfigError(std::string(key) + ": expected a non-negative integer, got '" + v + "'");
}

}  // namespace

void RunConfig::set(std::string_view key, std::string_view raw) {
  const std::string v = trim(raw);
  if (model.set(key, v) || train.set(key, v)) return;
  if (key == "gen_seed") {
    synthetic.seed = to_size(key, v);
  } else if (key == "gen_sessions") {
    synthetic.sessions = to_size(key, v);
  } else if (key == "gen_min_length") {
    synthetic.min_length = to_size(key, v);
  } else if (key == "gen_max_length") {
    synthetic.max_length = to_size(key, v);
  } else if (key == "gen_min_words") {
    synthetic.min_words = to_size(key, v);
  } else if (key == "gen_max_words") {
    synthetic.max_words = to_size(key, v);
  } else {
    throw ConfigError("unknown key '" + std::string(key) + "'");
  }
}

nlohmann::ordered_json RunConfig::to_json() const {
  nlohmann::ordered_json j;
  j["model"] = model.to_json();
  j["train"] = train.to_json();
  auto& g = j["synthetic"];
  g["seed"] = synthetic.seed;
  g["sessions"] = synthetic.sessions;
  g["min_length"] = synthetic.min_length;
  g["max_length"] = synthetic.max_length;
  g["min_words"] = synthetic.min_words;
  g["max_words"] = synthetic.max_words;
  return j;
}

void apply_config(RunConfig& cfg, const std::string& text, const std::string& origin) {
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    const std::string body = trim(line);
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(origin + ":" + std::to_string(lineno) + ": expected key = value");
    }
    const std::string key = trim(std::string_view(body).substr(0, eq));
    try {
      cfg.set(key, std::string_view(body).substr(eq + 1));
    } catch (const Error& e) {
      throw Error(e.code(), origin + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
}

RunConfig parse_config(const std::string& text, const std::string& origin) {
  RunConfig cfg;
  apply_config(cfg, text, origin);
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), path);
}

}  // namespace miobs
