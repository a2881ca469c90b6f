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

#include "core/loss.h"

#include <algorithm>
#include <cmath>
#include <string>

#include "core/error.h"

namespace miobs {

std::string_view to_string(LossVariant v) {
  switch (v) {
    case LossVariant::kCrossEntropy: return "ce";
    case LossVariant::kWeightedCrossEntropy: return "wce";
    case LossVariant::kFocal: return "focal";
  }
  return "focal";
}

LossVariant parse_loss_variant(std::string_view s) {
  if (s == "ce") return LossVariant::kCrossEntropy;
  if (s == "wce") return LossVariant::kWeightedCrossEntropy;
  if (s == "focal" || s == "fl") return LossVariant::kFocal;
  throw ConfigError("unknown loss '" + std::string(s) + "' (ce, wce, focal)");
}

std::vector<double> FocalConfig::default_alpha(Speaker role) {
  // Client order Fn, Ct, St; therapist order Fa, Res, Rec, Gi, Quc, Quo, Mia, Min.
  if (role == Speaker::kClient) return {0.25, 1.0, 1.0};
  return {0.5, 1.0, 1.0, 1.0, 0.75, 0.75, 1.0, 1.0};
}

FocalConfig FocalConfig::Focal(Speaker role, double gamma) {
  return {LossVariant::kFocal, default_alpha(role), gamma};
}

FocalConfig FocalConfig::Weighted(Speaker role) {
  return {LossVariant::kWeightedCrossEntropy, default_alpha(role), 0.0};
}

FocalConfig FocalConfig::Plain(std::size_t labels) {
  return {LossVariant::kCrossEntropy, std::vector<double>(labels, 1.0), 0.0};
}

double FocalConfig::alpha_for(std::size_t label) const {
  if (variant == LossVariant::kCrossEntropy) return 1.0;
  return alpha.at(label);
}

double FocalConfig::effective_gamma() const {
  return variant == LossVariant::kFocal ? gamma : 0.0;
}

void FocalConfig::validate(std::size_t labels) const {
  if (variant != LossVariant::kCrossEntropy && alpha.size() != labels) {
    throw ConfigError("loss alpha has " + std::to_string(alpha.size()) +
                      " weights for " + std::to_string(labels) + " labels");
  }
  for (double a : alpha) {
    if (!(a > 0.0)) throw ConfigError("loss alpha weights must be positive");
  }
  if (!(gamma >= 0.0)) throw ConfigError("focal gamma must be >= 0");
}

namespace {

void check_gold(std::size_t gold, std::size_t n) {
  if (gold >= n) {
    throw ContractError("gold label " + std::to_string(gold) + " outside " +
                        std::to_string(n) + " labels");
  }
}

}  // namespace

double focal_loss(std::span<const double> p, std::size_t gold, const FocalConfig& cfg) {
  check_gold(gold, p.size());
  const double pt = std::max(p[gold], kProbabilityFloor);
  const double gamma = cfg.effective_gamma();
  const double modulator = gamma == 0.0 ? 1.0 : std::pow(1.0 - p[gold], gamma);
  return -cfg.alpha_for(gold) * modulator * std::log(pt);
}

double cross_entropy(std::span<const double> p, std::size_t gold) {
  check_gold(gold, p.size());
  return -std::log(std::max(p[gold], kProbabilityFloor));
}

double weighted_cross_entropy(std::span<const double> p, std::size_t gold,
                              std::span<const double> alpha) {
  check_gold(gold, p.size());
  return -alpha[gold] * std::log(std::max(p[gold], kProbabilityFloor));
}

Var focal_loss(Var probs, std::size_t gold, const FocalConfig& cfg) {
  check_gold(gold, probs.value().size());
  Var pt = pick(probs, gold);
  Var nll = log(pt, kProbabilityFloor);
  const double gamma = cfg.effective_gamma();
  if (gamma != 0.0) nll = mul(pow(affine(pt, -1.0, 1.0), gamma), nll);
  return scale(nll, -cfg.alpha_for(gold));
}

}  // namespace miobs
