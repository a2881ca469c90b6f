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

#include "core/labels.h"

namespace miobs {

std::string_view to_string(Speaker s) {
  return s == Speaker::kClient ? "C" : "T";
}

std::optional<Speaker> parse_speaker(std::string_view s) {
  if (s == "C") return Speaker::kClient;
  if (s == "T") return Speaker::kTherapist;
  return std::nullopt;
}

std::string_view to_string(Task t) {
  return t == Task::kCategorize ? "categorize" : "forecast";
}

std::optional<Task> parse_task(std::string_view s) {
  if (s == "categorize") return Task::kCategorize;
  if (s == "forecast") return Task::kForecast;
  return std::nullopt;
}

std::string_view role_name(Speaker s) {
  return s == Speaker::kClient ? "client" : "therapist";
}

std::optional<Speaker> parse_role(std::string_view s) {
  if (s == "client" || s == "C") return Speaker::kClient;
  if (s == "therapist" || s == "T") return Speaker::kTherapist;
  return std::nullopt;
}

const LabelSet& LabelSet::For(Speaker role) {
  static const LabelSet client(Speaker::kClient, {"Fn", "Ct", "St"});
  static const LabelSet therapist(
      Speaker::kTherapist,
      {"Fa", "Res", "Rec", "Gi", "Quc", "Quo", "Mia", "Min"});
  return role == Speaker::kClient ? client : therapist;
}

std::optional<std::size_t> LabelSet::index(std::string_view code) const {
  for (std::size_t i = 0; i < codes_.size(); ++i) {
    if (codes_[i] == code) return i;
  }
  return std::nullopt;
}

std::optional<Speaker> role_of_code(std::string_view code) {
  if (LabelSet::For(Speaker::kClient).index(code)) return Speaker::kClient;
  if (LabelSet::For(Speaker::kTherapist).index(code)) return Speaker::kTherapist;
  return std::nullopt;
}

}  // namespace miobs
