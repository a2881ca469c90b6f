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

#ifndef MIOBS_CORE_PARAMETERS_H_
#define MIOBS_CORE_PARAMETERS_H_

#include <cstdint>
#include <deque>
#include <string>
#include <string_view>
#include <vector>

#include "core/random.h"
#include "core/tensor.h"

namespace miobs {

// Owns every trainable array of a network at stable addresses.
class ParameterStore {
 public:
  explicit ParameterStore(std::uint64_t seed = 0) : seed_(seed) {}
  ParameterStore(const ParameterStore&) = delete;
  ParameterStore& operator=(const ParameterStore&) = delete;
  ParameterStore(ParameterStore&&) = default;
  ParameterStore& operator=(ParameterStore&&) = default;

  Parameter& add(const std::string& name, Tensor value);
  // Uniform(-bound, bound) init from a stream keyed by (seed, name), so a
  // component's initial values do not depend on what else was built.
  Parameter& add_uniform(const std::string& name, Shape shape, double bound);
  Parameter& add_zeros(const std::string& name, Shape shape);

  Parameter* find(std::string_view name);
  const Parameter* find(std::string_view name) const;
  std::vector<Parameter*> all();
  std::vector<const Parameter*> all() const;
  std::size_t size() const { return params_.size(); }
  std::size_t scalar_count() const;
  void zero_grad();

  // Stream for arbitrary keyed draws (e.g. embedding fallback rows).
  Rng stream(std::string_view key) const;

 private:
  std::uint64_t seed_;
  std::deque<Parameter> params_;
};

}  // namespace miobs

#endif  // MIOBS_CORE_PARAMETERS_H_
