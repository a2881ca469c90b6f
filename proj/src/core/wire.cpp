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

#include "core/wire.h"

#include <cstdio>
#include <cstdlib>

#include "core/metrics.h"

namespace miobs {

double wire_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return std::strtod(buf, nullptr);
}

nlohmann::ordered_json distribution_json(const LabelSet& labels, std::span<const double> probs) {
  nlohmann::ordered_json j = nlohmann::ordered_json::object();
  for (std::size_t i = 0; i < labels.size(); ++i) j[labels.code(i)] = wire_number(probs[i]);
  return j;
}

nlohmann::ordered_json top_k_json(const LabelSet& labels, std::span<const double> probs,
                                  std::size_t k) {
  nlohmann::ordered_json j = nlohmann::ordered_json::array();
  for (std::size_t i : top_k(probs, k)) {
    j.push_back({{"code", labels.code(i)}, {"p", wire_number(probs[i])}});
  }
  return j;
}

bool min_warning(const LabelSet& labels, std::span<const double> probs, std::size_t k) {
  const auto min = labels.index("Min");
  if (!min) return false;
  for (std::size_t i : top_k(probs, k))
    if (i == *min) return true;
  return false;
}

}  // namespace miobs
