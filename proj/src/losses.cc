// Copyright 2026 The hierloss Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
#include "hierloss/losses.h"

#include <cmath>
#include <string>
#include <utility>

#include "hierloss/error.h"

namespace hierloss {

namespace {

double ClampedLog(double p) { return std::log(std::max(p, kLogEpsilon)); }

// d/dp log(max(p, eps)).
double ClampedLogDerivative(double p) { return p > kLogEpsilon ? 1.0 / p : 0.0; }

void CheckTarget(std::size_t size, std::size_t target) {
  if (target >= size) {
    throw Error(ErrorCode::kIndexOutOfRange,
                "target " + std::to_string(target) + " >= " +
                    std::to_string(size) + " classes");
  }
}

// -a (1 - q)^gamma log(max(q, eps)) and its derivative in q.
double FocalTerm(double q, double a, double gamma) {
  return -a * std::pow(1.0 - q, gamma) * ClampedLog(q);
}

double FocalTermDerivative(double q, double a, double gamma) {
  const double log_q = ClampedLog(q);
  double d = -a * std::pow(1.0 - q, gamma) * ClampedLogDerivative(q);
  if (gamma != 0.0 && log_q != 0.0) {
    d += a * gamma * std::pow(1.0 - q, gamma - 1.0) * log_q;
  }
  return d;
}

}  // namespace

void ValidateFocalParams(const FocalParams& params) {
  if (!std::isfinite(params.gamma) || params.gamma < 0.0) {
    throw Error(ErrorCode::kConfig, "focal gamma must be finite and >= 0");
  }
  if (!(params.alpha_balance >= 0.0 && params.alpha_balance <= 1.0)) {
    throw Error(ErrorCode::kConfig, "focal alpha_balance must be in [0, 1]");
  }
}

void ValidateLevelWeights(const LevelWeights& weights, int depth) {
  if (static_cast<int>(weights.values.size()) != depth) {
    throw Error(ErrorCode::kWeightLengthMismatch,
                std::to_string(weights.values.size()) +
                    " level weights for a taxonomy of depth " +
                    std::to_string(depth));
  }
  bool any_positive = false;
  for (double w : weights.values) {
    if (!std::isfinite(w) || w < 0.0) {
      throw Error(ErrorCode::kConfig, "level weights must be finite and >= 0");
    }
    any_positive = any_positive || w > 0.0;
  }
  if (!any_positive) {
    throw Error(ErrorCode::kConfig, "at least one level weight must be > 0");
  }
}

TargetSpec MakeTarget(const Taxonomy& taxonomy, std::size_t leaf_index) {
  TargetSpec target{leaf_index, {}};
  for (int l = 1; l <= taxonomy.levels(); ++l) {
    target.per_level.push_back(taxonomy.map_leaf_to_level(leaf_index, l));
  }
  return target;
}

double CrossEntropyValue(std::span<const double> p, std::size_t target) {
  CheckTarget(p.size(), target);
  return -ClampedLog(p[target]);
}

std::vector<double> CrossEntropyGradient(std::span<const double> p,
                                         std::size_t target) {
  CheckTarget(p.size(), target);
  std::vector<double> grad(p.size(), 0.0);
  grad[target] = -ClampedLogDerivative(p[target]);
  return grad;
}

double CrossEntropy(const ProbVector& p, std::size_t target) {
  if (!p.distribution) {
    throw Error(ErrorCode::kNotADistribution,
                "cross-entropy needs a distribution-tagged vector");
  }
  ValidateProbVector(p);
  return CrossEntropyValue(p.values, target);
}

double FocalLossValue(std::span<const double> p, std::size_t target,
                      const FocalParams& params) {
  CheckTarget(p.size(), target);
  double total = 0.0;
  for (std::size_t c = 0; c < p.size(); ++c) {
    total += c == target
                 ? FocalTerm(p[c], params.alpha_balance, params.gamma)
                 : FocalTerm(1.0 - p[c], 1.0 - params.alpha_balance,
                             params.gamma);
  }
  return total;
}

std::vector<double> FocalLossGradient(std::span<const double> p,
                                      std::size_t target,
                                      const FocalParams& params) {
  CheckTarget(p.size(), target);
  std::vector<double> grad(p.size());
  for (std::size_t c = 0; c < p.size(); ++c) {
    grad[c] = c == target
                  ? FocalTermDerivative(p[c], params.alpha_balance,
                                        params.gamma)
                  : -FocalTermDerivative(1.0 - p[c],
                                         1.0 - params.alpha_balance,
                                         params.gamma);
  }
  return grad;
}

double FocalLoss(const ProbVector& p, std::size_t target,
                 const FocalParams& params) {
  ValidateFocalParams(params);
  ValidateProbVector(p);
  return FocalLossValue(p.values, target, params);
}

HierarchicalObjective::HierarchicalObjective(const Taxonomy& taxonomy,
                                             LevelWeights weights,
                                             AggregationMode mode,
                                             BaseLoss base,
                                             UnionOptions options)
    : aggregator_(taxonomy, mode, options),
      weights_(std::move(weights)),
      base_(base) {
  ValidateLevelWeights(weights_, taxonomy.levels());
  if (base_.kind == BaseLossKind::kFocal) ValidateFocalParams(base_.focal);
  if (mode == AggregationMode::kSum && base_.kind != BaseLossKind::kCrossEntropy) {
    throw Error(ErrorCode::kConfig,
                "sum aggregation pairs with cross-entropy only");
  }
}

double HierarchicalObjective::LevelLoss(std::span<const double> p,
                                        std::size_t target) const {
  return base_.kind == BaseLossKind::kCrossEntropy
             ? CrossEntropyValue(p, target)
             : FocalLossValue(p, target, base_.focal);
}

std::vector<double> HierarchicalObjective::LevelGradient(
    std::span<const double> p, std::size_t target) const {
  return base_.kind == BaseLossKind::kCrossEntropy
             ? CrossEntropyGradient(p, target)
             : FocalLossGradient(p, target, base_.focal);
}

LossBreakdown HierarchicalObjective::Evaluate(std::span<const double> leaf_probs,
                                              const TargetSpec& target) const {
  const int depth = taxonomy().levels();
  if (static_cast<int>(target.per_level.size()) != depth) {
    throw Error(ErrorCode::kLevelMismatch, "target spec depth mismatch");
  }
  const auto levels = aggregator_.AllLevels(leaf_probs);
  LossBreakdown out;
  out.per_level.reserve(depth);
  for (int l = 1; l <= depth; ++l) {
    out.per_level.push_back(LevelLoss(levels[l - 1], target.per_level[l - 1]));
  }
  for (int l = 1; l <= depth; ++l) {
    out.total += weights_.values[l - 1] * out.per_level[l - 1];
  }
  return out;
}

std::vector<double> HierarchicalObjective::Gradient(
    std::span<const double> leaf_probs, const TargetSpec& target) const {
  const Taxonomy& t = taxonomy();
  const int depth = t.levels();
  if (static_cast<int>(target.per_level.size()) != depth) {
    throw Error(ErrorCode::kLevelMismatch, "target spec depth mismatch");
  }
  const auto levels = aggregator_.AllLevels(leaf_probs);

  // Reverse-mode sweep from the root level down to the leaves.
  std::vector<double> upstream =
      LevelGradient(levels[depth - 1], target.per_level[depth - 1]);
  for (double& g : upstream) g *= weights_.values[depth - 1];
  for (int l = depth - 1; l >= 1; --l) {
    const auto& p = levels[l - 1];
    std::vector<double> local(p.size());
    if (mode() == AggregationMode::kSum) {
      for (std::size_t k = 0; k < p.size(); ++k) {
        local[k] = upstream[t.parent_index(l, k)];
      }
    } else {
      const auto sibling = UnionSiblingComplements(p, t, l);
      for (std::size_t k = 0; k < p.size(); ++k) {
        local[k] = upstream[t.parent_index(l, k)] * sibling[k];
      }
    }
    const auto own = LevelGradient(p, target.per_level[l - 1]);
    for (std::size_t k = 0; k < p.size(); ++k) {
      local[k] += weights_.values[l - 1] * own[k];
    }
    upstream = std::move(local);
  }
  return upstream;
}

namespace {

void CheckLeafInput(const ProbVector& leaf_p, const Taxonomy& taxonomy,
                    AggregationMode mode) {
  if (leaf_p.level != 1 || leaf_p.values.size() != taxonomy.num_leaves()) {
    throw Error(ErrorCode::kLevelMismatch,
                "hierarchical losses take a level-1 vector of length " +
                    std::to_string(taxonomy.num_leaves()));
  }
  if (mode == AggregationMode::kSum && !leaf_p.distribution) {
    throw Error(ErrorCode::kNotADistribution,
                "sum mode needs a distribution-tagged leaf vector");
  }
  ValidateProbVector(leaf_p);
}

}  // namespace

LossBreakdown HierarchicalLoss(const ProbVector& leaf_p,
                               const Taxonomy& taxonomy,
                               const TargetSpec& target,
                               const LevelWeights& weights,
                               AggregationMode mode, const BaseLoss& base) {
  HierarchicalObjective objective(taxonomy, weights, mode, base);
  CheckLeafInput(leaf_p, taxonomy, mode);
  return objective.Evaluate(leaf_p.values, target);
}

std::vector<double> HierarchicalGradient(const ProbVector& leaf_p,
                                         const Taxonomy& taxonomy,
                                         const TargetSpec& target,
                                         const LevelWeights& weights,
                                         AggregationMode mode,
                                         const BaseLoss& base) {
  HierarchicalObjective objective(taxonomy, weights, mode, base);
  CheckLeafInput(leaf_p, taxonomy, mode);
  return objective.Gradient(leaf_p.values, target);
}

LevelWeights ExpLevelWeights(double alpha, int depth) {
  if (!(alpha > 0.0)) {
    throw Error(ErrorCode::kNonPositiveAlpha, "alpha must be > 0");
  }
  if (depth < 1) throw Error(ErrorCode::kConfig, "depth must be >= 1");
  LevelWeights w;
  for (int l = 1; l <= depth; ++l) w.values.push_back(std::exp(-alpha * (l - 1)));
  return w;
}

std::optional<WeightScheme> ParseWeightScheme(std::string_view name) {
  if (name == "leaf_focused_det") return WeightScheme::kLeafFocusedDet;
  if (name == "leaf_focused_cls") return WeightScheme::kLeafFocusedCls;
  if (name == "hier_focused_cls") return WeightScheme::kHierFocusedCls;
  return std::nullopt;
}

std::string_view WeightSchemeName(WeightScheme scheme) {
  switch (scheme) {
    case WeightScheme::kLeafFocusedDet: return "leaf_focused_det";
    case WeightScheme::kLeafFocusedCls: return "leaf_focused_cls";
    case WeightScheme::kHierFocusedCls: return "hier_focused_cls";
  }
  return "unknown";
}

LevelWeights NamedWeightScheme(WeightScheme scheme, int depth) {
  // Weights are held in hundredths and divided once, so that e.g. 30 / 300
  // yields the double nearest to 0.1.
  int leaf_pct = 0;
  int rest_pct = 0;
  switch (scheme) {
    case WeightScheme::kLeafFocusedDet: {
      if (depth < 3) {
        throw Error(ErrorCode::kSchemeDepthMismatch,
                    "leaf_focused_det needs at least 3 levels");
      }
      LevelWeights w{std::vector<double>(depth, 0.0)};
      w.values[0] = 80 / 100.0;
      w.values[1] = 10 / 100.0;
      w.values[2] = 10 / 100.0;
      return w;
    }
    case WeightScheme::kLeafFocusedCls:
      leaf_pct = 70;
      rest_pct = 30;
      break;
    case WeightScheme::kHierFocusedCls:
      leaf_pct = 10;
      rest_pct = 90;
      break;
  }
  if (depth < 2) {
    throw Error(ErrorCode::kSchemeDepthMismatch,
                std::string(WeightSchemeName(scheme)) +
                    " needs at least 2 levels");
  }
  LevelWeights w;
  w.values.push_back(leaf_pct / 100.0);
  const double share = rest_pct / (100.0 * (depth - 1));
  for (int l = 2; l <= depth; ++l) w.values.push_back(share);
  return w;
}

double BertinettoHxe(const ProbVector& leaf_p, const Taxonomy& taxonomy,
                     const TargetSpec& target, double alpha) {
  if (!(alpha > 0.0)) {
    throw Error(ErrorCode::kNonPositiveAlpha, "alpha must be > 0");
  }
  CheckLeafInput(leaf_p, taxonomy, AggregationMode::kSum);
  const int depth = taxonomy.levels();
  if (static_cast<int>(target.per_level.size()) != depth) {
    throw Error(ErrorCode::kLevelMismatch, "target spec depth mismatch");
  }
  const auto mass = AggregateAllLevels(leaf_p.values, taxonomy,
                                       AggregationMode::kSum);
  double loss = 0.0;
  for (int l = 1; l < depth; ++l) {
    const double num = mass[l - 1][target.per_level[l - 1]];
    const double den = std::max(mass[l][target.per_level[l]], kLogEpsilon);
    loss -= std::exp(-alpha * (l - 1)) * ClampedLog(num / den);
  }
  return loss;
}

}  // namespace hierloss
