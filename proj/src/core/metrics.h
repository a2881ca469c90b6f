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

#ifndef MIOBS_CORE_METRICS_H_
#define MIOBS_CORE_METRICS_H_

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

namespace miobs {

// Counts with rows = gold label, columns = predicted label.
class ConfusionMatrix {
 public:
  explicit ConfusionMatrix(std::size_t labels);

  void add(std::size_t gold, std::size_t predicted, std::uint64_t count = 1);
  std::size_t labels() const { return n_; }
  std::uint64_t at(std::size_t gold, std::size_t predicted) const {
    return counts_[gold * n_ + predicted];
  }
  std::uint64_t gold_count(std::size_t gold) const;
  std::uint64_t predicted_count(std::size_t predicted) const;
  std::uint64_t total() const;
  // Each row divided by its gold count; all-zero rows stay zero.
  std::vector<std::vector<double>> row_normalized() const;

 private:
  std::size_t n_;
  std::vector<std::uint64_t> counts_;
};

struct LabelScores {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::uint64_t support = 0;
};

struct Prf1 {
  std::vector<LabelScores> per_label;
  double macro_f1 = 0.0;
};

// Ratios with a zero denominator are 0.
Prf1 prf1(const ConfusionMatrix& confusion);

// Labels ordered by descending probability; equal probabilities keep label order.
std::vector<std::size_t> top_k(std::span<const double> probs, std::size_t k);

double recall_at_k(const std::vector<std::vector<double>>& probs,
                   const std::vector<std::size_t>& gold, std::size_t k);

std::size_t argmax(std::span<const double> probs);

struct EvalReport {
  std::vector<std::string> labels;
  std::vector<LabelScores> per_label;
  double macro_f1 = 0.0;
  std::size_t k = 3;
  double recall_at_k = 0.0;
  ConfusionMatrix confusion{1};
  std::size_t instances = 0;

  nlohmann::ordered_json to_json() const;
};

EvalReport make_report(const std::vector<std::string>& labels,
                       const std::vector<std::vector<double>>& probs,
                       const std::vector<std::size_t>& gold, std::size_t k);

}  // namespace miobs

#endif  // MIOBS_CORE_METRICS_H_
