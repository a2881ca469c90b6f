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

#include "service/observer.h"

#include <algorithm>
#include <cstdio>
#include <sstream>
#include <vector>

#include "core/error.h"
#include "core/metrics.h"
#include "core/wire.h"

namespace miobs {

const Model* ObserverModels::categorizer(Speaker s) const {
  return (s == Speaker::kClient ? client_categorize : therapist_categorize).get();
}

const Model* ObserverModels::forecaster(Speaker s) const {
  return (s == Speaker::kClient ? client_forecast : therapist_forecast).get();
}

std::size_t ObserverModels::history() const {
  std::size_t n = 1;
  for (const auto* m : {client_categorize.get(), client_forecast.get(),
                        therapist_categorize.get(), therapist_forecast.get()}) {
    if (m) n = std::max(n, m->config().window);
  }
  return n;
}

Window window_for(const std::deque<Utterance>& buffer, std::size_t n) {
  std::vector<Utterance> tail(buffer.end() - static_cast<std::ptrdiff_t>(std::min(n, buffer.size())),
                              buffer.end());
  return make_window(tail, tail.size() - 1, n);
}

namespace {

Reply error_reply(int status, const std::string& message) {
  Reply r;
  r.status = status;
  r.body["error"] = message;
  return r;
}

}  // namespace

Observer::Observer(ObserverModels models, std::string replay_log)
    : models_(std::move(models)), capacity_(models_.history()) {
  if (!replay_log.empty()) {
    log_path_ = replay_log;
    log_.open(replay_log, std::ios::app | std::ios::binary);
    if (!log_) throw IoError("cannot open replay log '" + replay_log + "'");
  }
}

std::shared_ptr<Observer::LiveSession> Observer::find(const std::string& id) const {
  std::shared_lock lock(sessions_mu_);
  auto it = sessions_.find(id);
  return it == sessions_.end() ? nullptr : it->second;
}

std::string Observer::next_id() {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "s%06llu", static_cast<unsigned long long>(++counter_));
  return buf;
}

void Observer::log(const nlohmann::ordered_json& record) {
  std::lock_guard lock(log_mu_);
  if (!log_.is_open() || log_muted_) return;
  log_ << record.dump() << '\n';
  log_.flush();
}

Reply Observer::create_session() {
  std::string id;
  {
    std::unique_lock lock(sessions_mu_);
    id = next_id();
    sessions_.emplace(id, std::make_shared<LiveSession>());
  }
  log({{"op", "create"}, {"session_id", id}});
  Reply r;
  r.status = 201;
  r.body["session_id"] = id;
  return r;
}

Reply Observer::add_utterance(const std::string& id, const std::string& speaker_code,
                              const std::string& text) {
  auto session = find(id);
  if (!session) return error_reply(404, "unknown session '" + id + "'");
  auto speaker = parse_speaker(speaker_code);
  if (!speaker) return error_reply(422, "speaker must be C or T, got '" + speaker_code + "'");

  std::lock_guard lock(session->mu);
  Utterance u;
  u.speaker = *speaker;
  u.text = text;
  session->buffer.push_back(std::move(u));
  while (session->buffer.size() > capacity_) session->buffer.pop_front();
  const std::size_t index = session->total++;
  log({{"op", "utterance"}, {"session_id", id}, {"speaker", speaker_code}, {"text", text}});

  Reply r;
  r.status = 201;
  r.body["session_id"] = id;
  r.body["index"] = index;
  r.body["speaker"] = speaker_code;
  const Model* model = models_.categorizer(*speaker);
  if (model == nullptr) {
    r.body["code"] = nullptr;
    r.body["distribution"] = nlohmann::ordered_json::object();
    return r;
  }
  const std::vector<double> p = model->predict(window_for(session->buffer, model->config().window));
  const LabelSet& labels = model->labels();
  r.body["code"] = labels.code(argmax(p));
  r.body["distribution"] = distribution_json(labels, p);
  return r;
}

Reply Observer::forecast(const std::string& id, const std::string& speaker_code,
                         std::optional<std::size_t> k) const {
  auto session = find(id);
  if (!session) return error_reply(404, "unknown session '" + id + "'");
  auto speaker = parse_speaker(speaker_code);
  if (!speaker) return error_reply(422, "speaker must be C or T, got '" + speaker_code + "'");
  const LabelSet& labels = LabelSet::For(*speaker);
  const std::size_t kk = k.value_or(3);
  if (kk == 0 || kk > labels.size()) {
    return error_reply(422, "k must lie in [1, " + std::to_string(labels.size()) + "]");
  }
  const Model* model = models_.forecaster(*speaker);
  if (model == nullptr) {
    return error_reply(503, "no forecast model loaded for " + std::string(role_name(*speaker)));
  }

  std::lock_guard lock(session->mu);
  if (session->buffer.empty()) return error_reply(409, "session '" + id + "' has no utterances");
  const std::vector<double> p =
      model->forecast(window_for(session->buffer, model->config().window), *speaker);
  Reply r;
  r.body["session_id"] = id;
  r.body["speaker"] = speaker_code;
  r.body["k"] = kk;
  r.body["top"] = top_k_json(labels, p, kk);
  r.body["warning"] = min_warning(labels, p, kk);
  r.body["distribution"] = distribution_json(labels, p);
  return r;
}

Reply Observer::clone_session(const std::string& id) {
  auto source = find(id);
  if (!source) return error_reply(404, "unknown session '" + id + "'");
  auto copy = std::make_shared<LiveSession>();
  {
    std::lock_guard lock(source->mu);
    copy->buffer = source->buffer;
    copy->total = source->total;
  }
  std::string new_id;
  {
    std::unique_lock lock(sessions_mu_);
    new_id = next_id();
    sessions_.emplace(new_id, copy);
  }
  log({{"op", "clone"}, {"session_id", id}, {"clone_id", new_id}});
  Reply r;
  r.status = 201;
  r.body["session_id"] = new_id;
  r.body["source_id"] = id;
  return r;
}

Reply Observer::health() const {
  Reply r;
  r.body["status"] = "ok";
  auto& m = r.body["models"];
  m["client_categorize"] = models_.client_categorize != nullptr;
  m["client_forecast"] = models_.client_forecast != nullptr;
  m["therapist_categorize"] = models_.therapist_categorize != nullptr;
  m["therapist_forecast"] = models_.therapist_forecast != nullptr;
  r.body["sessions"] = session_count();
  return r;
}

std::size_t Observer::session_count() const {
  std::shared_lock lock(sessions_mu_);
  return sessions_.size();
}

void Observer::replay(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open replay log '" + path + "'");
  struct Mute {
    bool& flag;
    ~Mute() { flag = false; }
  } mute{log_muted_};
  {
    std::lock_guard lock(log_mu_);
    log_muted_ = !log_path_.empty() && path == log_path_;
  }
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const std::string where = path + ":" + std::to_string(lineno);
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
      const std::string op = j.at("op").get<std::string>();
      Reply r;
      if (op == "create") {
        r = create_session();
        if (r.body["session_id"] != j.at("session_id")) {
          throw ParseError(where + ": replayed session id differs from the log");
        }
      } else if (op == "utterance") {
        r = add_utterance(j.at("session_id").get<std::string>(),
                          j.at("speaker").get<std::string>(), j.at("text").get<std::string>());
      } else if (op == "clone") {
        r = clone_session(j.at("session_id").get<std::string>());
        if (r.status < 400 && r.body["session_id"] != j.at("clone_id")) {
          throw ParseError(where + ": replayed clone id differs from the log");
        }
      } else {
        throw ParseError(where + ": unknown op '" + op + "'");
      }
      if (r.status >= 400) throw ParseError(where + ": " + r.body.value("error", std::string()));
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(where + ": " + e.what());
    }
  }
}

}  // namespace miobs
