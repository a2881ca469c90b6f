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

#ifndef MIOBS_CORE_WIRE_H_
#define MIOBS_CORE_WIRE_H_

// JSON shapes shared by batch prediction and the HTTP service, so both emit
// the same bytes for the same window.

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "core/labels.h"
#include "json.hpp"

namespace miobs {

// Rounds to 6 significant digits (printf %.6g) and reads the result back.
double wire_number(double v);

// {"Fn": p, "Ct": p, ...} in label order.
nlohmann::ordered_json distribution_json(const LabelSet& labels, std::span<const double> probs);

// [{"code": c, "p": p}, ...] for the k most probable labels.
nlohmann::ordered_json top_k_json(const LabelSet& labels, std::span<const double> probs,
                                  std::size_t k);

// True when Min is among the k most probable labels.
bool min_warning(const LabelSet& labels, std::span<const double> probs, std::size_t k);

}  // namespace miobs

#endif  // MIOBS_CORE_WIRE_H_
