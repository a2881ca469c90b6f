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

#include "core/parameters.h"

#include "core/error.h"

namespace miobs {

namespace {

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

}  // namespace

Parameter& ParameterStore::add(const std::string& name, Tensor value) {
  if (find(name) != nullptr) throw ConfigError("duplicate parameter " + name);
  params_.emplace_back(name, std::move(value));
  return params_.back();
}

Parameter& ParameterStore::add_uniform(const std::string& name, Shape shape,
                                       double bound) {
  Rng rng = stream(name);
  Tensor t(shape);
  for (auto& v : t.data()) v = rng.uniform(-bound, bound);
  return add(name, std::move(t));
}

Parameter& ParameterStore::add_zeros(const std::string& name, Shape shape) {
  return add(name, Tensor(shape));
}

Parameter* ParameterStore::find(std::string_view name) {
  for (auto& p : params_)
    if (p.name == name) return &p;
  return nullptr;
}

const Parameter* ParameterStore::find(std::string_view name) const {
  for (const auto& p : params_)
    if (p.name == name) return &p;
  return nullptr;
}

std::vector<Parameter*> ParameterStore::all() {
  std::vector<Parameter*> out;
  for (auto& p : params_) out.push_back(&p);
  return out;
}

std::vector<const Parameter*> ParameterStore::all() const {
  std::vector<const Parameter*> out;
  for (const auto& p : params_) out.push_back(&p);
  return out;
}

std::size_t ParameterStore::scalar_count() const {
  std::size_t n = 0;
  for (const auto& p : params_) n += p.value.size();
  return n;
}

void ParameterStore::zero_grad() {
  for (auto& p : params_) p.zero_grad();
}

Rng ParameterStore::stream(std::string_view key) const {
  return Rng(seed_ ^ fnv1a(key));
}

}  // namespace miobs
