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

#ifndef MIOBS_CORE_LABELS_H_
#define MIOBS_CORE_LABELS_H_

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace miobs {

enum class Speaker { kClient = 0, kTherapist = 1 };

enum class Task { kCategorize, kForecast };

std::string_view to_string(Speaker s);  // "C" / "T"
std::optional<Speaker> parse_speaker(std::string_view s);
std::string_view to_string(Task t);
std::optional<Task> parse_task(std::string_view s);
std::string_view role_name(Speaker s);  // "client" / "therapist"
std::optional<Speaker> parse_role(std::string_view s);

// The MISC code inventory for one speaker role, in a fixed order.
class LabelSet {
 public:
  static const LabelSet& For(Speaker role);

  Speaker role() const { return role_; }
  std::size_t size() const { return codes_.size(); }
  const std::string& code(std::size_t i) const { return codes_.at(i); }
  const std::vector<std::string>& codes() const { return codes_; }
  std::optional<std::size_t> index(std::string_view code) const;

 private:
  LabelSet(Speaker role, std::vector<std::string> codes)
      : role_(role), codes_(std::move(codes)) {}
  Speaker role_;
  std::vector<std::string> codes_;
};

// Which role a code belongs to, if it is a code at all.
std::optional<Speaker> role_of_code(std::string_view code);

}  // namespace miobs

#endif  // MIOBS_CORE_LABELS_H_
