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

#ifndef MIOBS_CORE_CONFIG_H_
#define MIOBS_CORE_CONFIG_H_

#include <string>
#include <string_view>

#include "core/data.h"
#include "core/model.h"
#include "core/train.h"

namespace miobs {

// Everything a config file can set. The file is "key = value" lines; '#'
// starts a comment. A "preset" line resets all model keys, so it goes first.
// See docs/config.md for the key list.
struct RunConfig {
  ModelConfig model = ModelConfig::Preset("C_C");
  TrainConfig train;
  SyntheticConfig synthetic;

  // Applies one setting; unknown keys are config errors.
  void set(std::string_view key, std::string_view value);
  nlohmann::ordered_json to_json() const;
};

// Applies "key = value" lines ('#' starts a comment) on top of `cfg`.
void apply_config(RunConfig& cfg, const std::string& text, const std::string& origin);

RunConfig parse_config(const std::string& text, const std::string& origin = "<memory>");
RunConfig load_config(const std::string& path);

}  // namespace miobs

#endif  // MIOBS_CORE_CONFIG_H_
