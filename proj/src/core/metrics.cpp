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

#include "core/metrics.h"

#include <algorithm>
#include <numeric>

#include "core/error.h"

namespace miobs {

ConfusionMatrix::ConfusionMatrix(std::size_t labels)
    : n_(labels), counts_(labels * labels, 0) {}

void ConfusionMatrix::add(std::size_t gold, std::size_t predicted, std::uint64_t count) {
  if (gold >= n_ || predicted >= n_) throw ContractError("confusion index out of range");
  counts_[gold * n_ + predicted] += count;
}

std::uint64_t ConfusionMatrix::gold_count(std::size_t gold) const {
  std::uint64_t s = 0;
  for (std::size_t j = 0; j < n_; ++j) s += at(gold, j);
  return s;
}

std::uint64_t ConfusionMatrix::predicted_count(std::size_t predicted) const {
  std::uint64_t s = 0;
  for (std::size_t i = 0; i < n_; ++i) s += at(i, predicted);
  return s;
}

std::uint64_t ConfusionMatrix::total() const {
  return std::accumulate(counts_.begin(), counts_.end(), std::uint64_t{0});
}

std::vector<std::vector<double>> ConfusionMatrix::row_normalized() const {
  std::vector<std::vector<double>> out(n_, std::vector<double>(n_, 0.0));
  for (std::size_t i = 0; i < n_; ++i) {
    const std::uint64_t g = gold_count(i);
    if (g == 0) continue;
    for (std::size_t j = 0; j < n_; ++j)
      out[i][j] = static_cast<double>(at(i, j)) / static_cast<double>(g);
  }
  return out;
}

Prf1 prf1(const ConfusionMatrix& confusion) {
  Prf1 out;
  const std::size_t n = confusion.labels();
  double f1_sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double tp = static_cast<double>(confusion.at(i, i));
    const double pred = static_cast<double>(confusion.predicted_count(i));
    const double gold = static_cast<double>(confusion.gold_count(i));
    LabelScores s;
    s.support = confusion.gold_count(i);
    s.precision = pred > 0 ? tp / pred : 0.0;
    s.recall = gold > 0 ? tp / gold : 0.0;
    s.f1 = s.precision + s.recall > 0
               ? 2.0 * s.precision * s.recall / (s.precision + s.recall)
               : 0.0;
    f1_sum += s.f1;
    out.per_label.push_back(s);
  }
  out.macro_f1 = n > 0 ? f1_sum / static_cast<double>(n) : 0.0;
  return out;
}

std::vector<std::size_t> top_k(std::span<const double> probs, std::size_t k) {
  if (k > probs.size()) {
    throw ContractError("k=" + std::to_string(k) + " exceeds " +
                        std::to_string(probs.size()) + " labels");
  }
  std::vector<std::size_t> order(probs.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return probs[a] > probs[b]; });
  order.resize(k);
  return order;
}

double recall_at_k(const std::vector<std::vector<double>>& probs,
                   const std::vector<std::size_t>& gold, std::size_t k) {
  if (probs.size() != gold.size()) throw ContractError("recall@k: rows and gold differ in length");
  if (probs.empty()) return 0.0;
  std::size_t hits = 0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    auto top = top_k(probs[i], k);
    if (std::find(top.begin(), top.end(), gold[i]) != top.end()) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(probs.size());
}

std::size_t argmax(std::span<const double> probs) {
  return top_k(probs, 1).front();
}

EvalReport make_report(const std::vector<std::string>& labels,
                       const std::vector<std::vector<double>>& probs,
                       const std::vector<std::size_t>& gold, std::size_t k) {
  EvalReport r;
  r.labels = labels;
  r.k = k;
  r.instances = probs.size();
  r.confusion = ConfusionMatrix(labels.size());
  for (std::size_t i = 0; i < probs.size(); ++i) r.confusion.add(gold[i], argmax(probs[i]));
  Prf1 scores = prf1(r.confusion);
  r.per_label = std::move(scores.per_label);
  r.macro_f1 = scores.macro_f1;
  r.recall_at_k = recall_at_k(probs, gold, k);
  return r;
}

nlohmann::ordered_json EvalReport::to_json() const {
  nlohmann::ordered_json j;
  j["schema"] = "miobs.eval_report/1";
  j["instances"] = instances;
  j["labels"] = labels;
  j["macro_f1"] = macro_f1;
  j["k"] = k;
  j["recall_at_k"] = recall_at_k;
  auto& per = j["per_label"] = nlohmann::ordered_json::array();
  for (std::size_t i = 0; i < labels.size(); ++i) {
    per.push_back({{"label", labels[i]},
                   {"precision", per_label[i].precision},
                   {"recall", per_label[i].recall},
                   {"f1", per_label[i].f1},
                   {"support", per_label[i].support}});
  }
  auto& counts = j["confusion"]["counts"] = nlohmann::ordered_json::array();
  for (std::size_t i = 0; i < labels.size(); ++i) {
    std::vector<std::uint64_t> r;
    for (std::size_t c = 0; c < labels.size(); ++c) r.push_back(confusion.at(i, c));
    counts.push_back(r);
  }
  j["confusion"]["row_normalized"] = confusion.row_normalized();
  return j;
}

}  // namespace miobs
