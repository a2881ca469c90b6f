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

#ifndef MIOBS_SERVICE_OBSERVER_H_
#define MIOBS_SERVICE_OBSERVER_H_

// Live-session state behind the HTTP API. Each operation returns the status
// code and JSON body the HTTP layer sends, so the logic is testable without
// sockets.

#include <cstddef>
#include <cstdint>
#include <deque>
#include <fstream>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>

#include "core/data.h"
#include "core/model.h"
#include "json.hpp"

namespace miobs {

struct ObserverModels {
  std::shared_ptr<const Model> client_categorize;
  std::shared_ptr<const Model> client_forecast;
  std::shared_ptr<const Model> therapist_categorize;
  std::shared_ptr<const Model> therapist_forecast;

  const Model* categorizer(Speaker s) const;
  const Model* forecaster(Speaker s) const;
  // Largest window any loaded model reads.
  std::size_t history() const;
};

struct Reply {
  int status = 200;
  nlohmann::ordered_json body;
};

class Observer {
 public:
  // Mutations are appended to `replay_log` when it is non-empty.
  explicit Observer(ObserverModels models, std::string replay_log = {});

  Reply create_session();
  Reply add_utterance(const std::string& id, const std::string& speaker,
                      const std::string& text);
  Reply forecast(const std::string& id, const std::string& speaker,
                 std::optional<std::size_t> k) const;
  Reply clone_session(const std::string& id);
  Reply health() const;

  // Re-applies the mutations recorded in a replay log. Replaying the log this
  // observer writes restores its sessions without appending to it.
  void replay(const std::string& path);

  std::size_t session_count() const;

 private:
  struct LiveSession {
    mutable std::mutex mu;
    std::deque<Utterance> buffer;  // at most history() utterances
    std::size_t total = 0;         // utterances ever added
  };

  std::shared_ptr<LiveSession> find(const std::string& id) const;
  std::string next_id();
  void log(const nlohmann::ordered_json& record);

  ObserverModels models_;
  std::size_t capacity_;
  mutable std::shared_mutex sessions_mu_;
  std::map<std::string, std::shared_ptr<LiveSession>> sessions_;
  std::uint64_t counter_ = 0;
  std::mutex log_mu_;
  std::string log_path_;
  bool log_muted_ = false;
  std::ofstream log_;
};

// Model vectors for a window over the tail of `buffer`.
Window window_for(const std::deque<Utterance>& buffer, std::size_t n);

}  // namespace miobs

#endif  // MIOBS_SERVICE_OBSERVER_H_
