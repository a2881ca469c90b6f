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

#ifndef MIOBS_CORE_LOSS_H_
#define MIOBS_CORE_LOSS_H_

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

#include "core/labels.h"
#include "core/tensor.h"

namespace miobs {

enum class LossVariant { kCrossEntropy, kWeightedCrossEntropy, kFocal };

std::string_view to_string(LossVariant v);
LossVariant parse_loss_variant(std::string_view s);

// Multiclass focal loss -alpha_t (1 - p_t)^gamma log(p_t). The ce variant
// forces alpha = 1 and gamma = 0; wce forces gamma = 0.
struct FocalConfig {
  LossVariant variant = LossVariant::kFocal;
  std::vector<double> alpha;
  double gamma = 0.0;

  // Per-role balance weights in LabelSet order.
  static std::vector<double> default_alpha(Speaker role);
  static FocalConfig Focal(Speaker role, double gamma);
  static FocalConfig Weighted(Speaker role);
  static FocalConfig Plain(std::size_t labels);

  double alpha_for(std::size_t label) const;
  double effective_gamma() const;
  void validate(std::size_t labels) const;
};

inline constexpr double kProbabilityFloor = 1e-12;

// Scalar reference forms on a probability vector.
double focal_loss(std::span<const double> p, std::size_t gold, const FocalConfig& cfg);
double cross_entropy(std::span<const double> p, std::size_t gold);
double weighted_cross_entropy(std::span<const double> p, std::size_t gold,
                              std::span<const double> alpha);

// Differentiable form over a probability Var.
Var focal_loss(Var probs, std::size_t gold, const FocalConfig& cfg);

}  // namespace miobs

#endif  // MIOBS_CORE_LOSS_H_
