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
//
// Per-level base losses and the weighted multi-level hierarchical loss
//
//   L = sum_l w_l * L_l(aggregated level-l prediction, level-l target)
//
// with gradients taken with respect to the leaf probabilities. Losses work on
// probabilities, not logits; every log is evaluated as log(max(p, 1e-12)).
#ifndef HIERLOSS_LOSSES_H_
#define HIERLOSS_LOSSES_H_

#include <cstddef>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "hierloss/aggregation.h"
#include "hierloss/taxonomy.h"

namespace hierloss {

inline constexpr double kLogEpsilon = 1e-12;

struct FocalParams {
  double gamma = 2.0;
  double alpha_balance = 0.25;
};

void ValidateFocalParams(const FocalParams& params);

enum class BaseLossKind { kCrossEntropy, kFocal };

struct BaseLoss {
  BaseLossKind kind = BaseLossKind::kCrossEntropy;
  FocalParams focal;

  static BaseLoss CrossEntropy() { return {}; }
  static BaseLoss Focal(FocalParams params = {}) {
    return {BaseLossKind::kFocal, params};
  }
};

// w_l for l = 1..L; values[0] is the leaf weight.
struct LevelWeights {
  std::vector<double> values;
};

// Throws kWeightLengthMismatch if the length differs from `depth` and
// kConfig for negative or non-finite entries or when every weight is zero.
void ValidateLevelWeights(const LevelWeights& weights, int depth);

// Target class at every level. per_level[l - 1] is the level-l ancestor of
// the leaf.
struct TargetSpec {
  std::size_t leaf_index = 0;
  std::vector<std::size_t> per_level;
};

TargetSpec MakeTarget(const Taxonomy& taxonomy, std::size_t leaf_index);

// -log(max(p[target], eps)). The ProbVector overloads validate their input;
// the span forms evaluate the bare formula.
double CrossEntropy(const ProbVector& p, std::size_t target);
double CrossEntropyValue(std::span<const double> p, std::size_t target);
std::vector<double> CrossEntropyGradient(std::span<const double> p,
                                         std::size_t target);

// Sigmoid focal loss summed over classes:
//   sum_c -a_c * (1 - q_c)^gamma * log(max(q_c, eps))
// with q_c = p_c, a_c = alpha for the target and q_c = 1 - p_c,
// a_c = 1 - alpha otherwise.
double FocalLoss(const ProbVector& p, std::size_t target,
                 const FocalParams& params);
double FocalLossValue(std::span<const double> p, std::size_t target,
                      const FocalParams& params);
std::vector<double> FocalLossGradient(std::span<const double> p,
                                      std::size_t target,
                                      const FocalParams& params);

struct LossBreakdown {
  double total = 0.0;
  // Unweighted L_l; total is sum_l weights[l - 1] * per_level[l - 1] taken in
  // level order starting from 0.0.
  std::vector<double> per_level;
};

// A fixed hierarchical loss configuration. Sum mode takes softmax outputs and
// cross-entropy only; union mode pairs with focal loss or with cross-entropy
// applied to the union scores. Above the leaf level the union scores are
// treated as independent per-class scores.
//
// Evaluate and Gradient take raw leaf values and do not check that they form
// a distribution, so they can be differentiated numerically.
class HierarchicalObjective {
 public:
  HierarchicalObjective(const Taxonomy& taxonomy, LevelWeights weights,
                        AggregationMode mode, BaseLoss base,
                        UnionOptions options = {});

  const Taxonomy& taxonomy() const { return aggregator_.taxonomy(); }
  const LevelWeights& weights() const { return weights_; }
  AggregationMode mode() const { return aggregator_.mode(); }
  const BaseLoss& base() const { return base_; }

  LossBreakdown Evaluate(std::span<const double> leaf_probs,
                         const TargetSpec& target) const;
  std::vector<double> Gradient(std::span<const double> leaf_probs,
                               const TargetSpec& target) const;

 private:
  double LevelLoss(std::span<const double> p, std::size_t target) const;
  std::vector<double> LevelGradient(std::span<const double> p,
                                    std::size_t target) const;

  LevelAggregator aggregator_;
  LevelWeights weights_;
  BaseLoss base_;
};

LossBreakdown HierarchicalLoss(const ProbVector& leaf_p,
                               const Taxonomy& taxonomy,
                               const TargetSpec& target,
                               const LevelWeights& weights,
                               AggregationMode mode, const BaseLoss& base);

std::vector<double> HierarchicalGradient(const ProbVector& leaf_p,
                                         const Taxonomy& taxonomy,
                                         const TargetSpec& target,
                                         const LevelWeights& weights,
                                         AggregationMode mode,
                                         const BaseLoss& base);

// w_l = exp(-alpha * (l - 1)).
LevelWeights ExpLevelWeights(double alpha, int depth);

enum class WeightScheme {
  kLeafFocusedDet,  // 0.8 leaf, 0.1 for each of the next two levels
  kLeafFocusedCls,  // 0.7 leaf, 0.3 split equally over the rest
  kHierFocusedCls,  // 0.1 leaf, 0.9 split equally over the rest
};

std::optional<WeightScheme> ParseWeightScheme(std::string_view name);
std::string_view WeightSchemeName(WeightScheme scheme);
LevelWeights NamedWeightScheme(WeightScheme scheme, int depth);

// Conditional-probability hierarchical cross-entropy used as a baseline:
//   -sum_{l=1}^{L-1} exp(-alpha (l - 1)) log P(a_l | a_{l+1})
// where a_l is the target's level-l ancestor and P(a_l | a_{l+1}) is the
// ratio of the leaf mass under a_l to the leaf mass under a_{l+1}.
// Denominators are clamped at eps before dividing.
double BertinettoHxe(const ProbVector& leaf_p, const Taxonomy& taxonomy,
                     const TargetSpec& target, double alpha);

}  // namespace hierloss

#endif  // HIERLOSS_LOSSES_H_
