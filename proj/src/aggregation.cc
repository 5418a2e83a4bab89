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
#include "hierloss/aggregation.h"

#include <algorithm>
#include <bit>
#include <cmath>
#include <string>

#include "hierloss/error.h"

namespace hierloss {

namespace {

constexpr std::size_t kMaxMaskBits = 30;

void CheckTransitionLevel(const Taxonomy& taxonomy, int level) {
  if (level < 1 || level >= taxonomy.levels()) {
    throw Error(ErrorCode::kLevelOutOfRange,
                "no transition above level " + std::to_string(level) +
                    " in a taxonomy of depth " +
                    std::to_string(taxonomy.levels()));
  }
}

void CheckLength(std::span<const double> probs, const Taxonomy& taxonomy,
                 int level) {
  if (probs.size() != taxonomy.num_classes(level)) {
    throw Error(ErrorCode::kLevelMismatch,
                "vector of length " + std::to_string(probs.size()) +
                    " does not match the " +
                    std::to_string(taxonomy.num_classes(level)) +
                    " classes of level " + std::to_string(level));
  }
}

// Level and length checks shared by the ProbVector entry points.
void CheckAggregable(const ProbVector& p, const Taxonomy& taxonomy) {
  if (p.level < 1 || p.level >= taxonomy.levels()) {
    throw Error(ErrorCode::kLevelMismatch,
                "cannot aggregate a level-" + std::to_string(p.level) +
                    " vector in a taxonomy of depth " +
                    std::to_string(taxonomy.levels()));
  }
  CheckLength(p.values, taxonomy, p.level);
}

std::vector<double> SumStep(std::span<const double> probs,
                            const Taxonomy& taxonomy, int level) {
  const LevelMatrix m = taxonomy.transition_matrix(level);
  std::vector<double> out(m.cols(), 0.0);
  for (std::size_t k = 0; k < m.rows(); ++k) out[m.parent_of(k)] += probs[k];
  return out;
}

double ComplementProduct(std::span<const double> probs,
                         std::span<const std::size_t> children) {
  double none = 1.0;
  for (std::size_t k : children) none *= 1.0 - probs[k];
  return 1.0 - none;
}

}  // namespace

std::string_view AggregationModeName(AggregationMode mode) {
  return mode == AggregationMode::kSum ? "sum" : "union";
}

std::optional<AggregationMode> ParseAggregationMode(std::string_view name) {
  if (name == "sum") return AggregationMode::kSum;
  if (name == "union") return AggregationMode::kUnion;
  return std::nullopt;
}

void ValidateProbVector(const ProbVector& p) {
  double total = 0.0;
  for (std::size_t i = 0; i < p.values.size(); ++i) {
    const double v = p.values[i];
    if (!(v >= 0.0 && v <= 1.0)) {
      throw Error(ErrorCode::kInvalidProbability,
                  "entry " + std::to_string(i) + " = " + std::to_string(v) +
                      " is outside [0, 1]");
    }
    total += v;
  }
  if (p.distribution && std::abs(total - 1.0) > kDistributionTolerance) {
    throw Error(ErrorCode::kNotADistribution,
                "entries sum to " + std::to_string(total));
  }
}

UnionPlan::UnionPlan(const Taxonomy& taxonomy, int level, UnionOptions options)
    : level_(level) {
  CheckTransitionLevel(taxonomy, level);
  if (options.max_enumerated_children > kMaxMaskBits) {
    throw Error(ErrorCode::kConfig,
                "max_enumerated_children must be <= " +
                    std::to_string(kMaxMaskBits));
  }
  num_children_ = taxonomy.num_classes(level);
  const std::size_t num_parents = taxonomy.num_classes(level + 1);
  parents_.resize(num_parents);
  for (std::size_t i = 0; i < num_parents; ++i) {
    ParentPlan& plan = parents_[i];
    auto kids = taxonomy.children(level + 1, i);
    plan.children.assign(kids.begin(), kids.end());
    const std::size_t n = plan.children.size();
    if (n > options.max_enumerated_children) {
      if (options.on_limit == ChildLimitPolicy::kThrow) {
        throw Error(ErrorCode::kChildrenCountExceedsLimit,
                    "parent '" + taxonomy.node(level + 1, i).id + "' has " +
                        std::to_string(n) + " children, limit is " +
                        std::to_string(options.max_enumerated_children));
      }
      plan.enumerate = false;
      continue;
    }
    plan.subsets_by_size.resize(n);
    const std::uint32_t end = std::uint32_t{1} << n;
    for (std::uint32_t mask = 1; mask < end; ++mask) {
      plan.subsets_by_size[std::popcount(mask) - 1].push_back(mask);
    }
  }
}

std::vector<double> UnionPlan::Apply(std::span<const double> child_probs) const {
  if (child_probs.size() != num_children_) {
    throw Error(ErrorCode::kLevelMismatch,
                "expected " + std::to_string(num_children_) +
                    " probabilities, got " +
                    std::to_string(child_probs.size()));
  }
  std::vector<double> out(parents_.size(), 0.0);
  for (std::size_t i = 0; i < parents_.size(); ++i) {
    const ParentPlan& plan = parents_[i];
    if (!plan.enumerate) {
      out[i] = ComplementProduct(child_probs, plan.children);
      continue;
    }
    double total = 0.0;
    for (std::size_t m = 1; m <= plan.subsets_by_size.size(); ++m) {
      double layer = 0.0;
      for (std::uint32_t mask : plan.subsets_by_size[m - 1]) {
        double product = 1.0;
        for (std::uint32_t bits = mask; bits != 0; bits &= bits - 1) {
          product *= child_probs[plan.children[std::countr_zero(bits)]];
        }
        layer += product;
      }
      total += (m % 2 == 1) ? layer : -layer;
    }
    out[i] = std::clamp(total, 0.0, 1.0);
  }
  return out;
}

std::vector<double> AggregateStep(std::span<const double> probs,
                                  const Taxonomy& taxonomy, int level,
                                  AggregationMode mode,
                                  const UnionOptions& options) {
  CheckTransitionLevel(taxonomy, level);
  CheckLength(probs, taxonomy, level);
  if (mode == AggregationMode::kSum) return SumStep(probs, taxonomy, level);
  return UnionPlan(taxonomy, level, options).Apply(probs);
}

LevelAggregator::LevelAggregator(const Taxonomy& taxonomy,
                                 AggregationMode mode, UnionOptions options)
    : taxonomy_(&taxonomy), mode_(mode) {
  if (mode_ == AggregationMode::kUnion) {
    for (int l = 1; l < taxonomy.levels(); ++l) {
      plans_.emplace_back(taxonomy, l, options);
    }
  }
}

std::vector<double> LevelAggregator::Step(std::span<const double> probs,
                                          int level) const {
  CheckTransitionLevel(*taxonomy_, level);
  CheckLength(probs, *taxonomy_, level);
  if (mode_ == AggregationMode::kSum) return SumStep(probs, *taxonomy_, level);
  return plans_[level - 1].Apply(probs);
}

std::vector<std::vector<double>> LevelAggregator::AllLevels(
    std::span<const double> leaf_probs) const {
  CheckLength(leaf_probs, *taxonomy_, 1);
  std::vector<std::vector<double>> levels;
  levels.reserve(taxonomy_->levels());
  levels.emplace_back(leaf_probs.begin(), leaf_probs.end());
  for (int l = 1; l < taxonomy_->levels(); ++l) {
    levels.push_back(Step(levels.back(), l));
  }
  return levels;
}

std::vector<double> LevelAggregator::ToLevel(std::span<const double> leaf_probs,
                                             int level) const {
  if (level < 1 || level > taxonomy_->levels()) {
    throw Error(ErrorCode::kLevelOutOfRange,
                "level " + std::to_string(level) + " outside [1, " +
                    std::to_string(taxonomy_->levels()) + "]");
  }
  CheckLength(leaf_probs, *taxonomy_, 1);
  std::vector<double> cur(leaf_probs.begin(), leaf_probs.end());
  for (int l = 1; l < level; ++l) cur = Step(cur, l);
  return cur;
}

std::vector<std::vector<double>> AggregateAllLevels(
    std::span<const double> leaf_probs, const Taxonomy& taxonomy,
    AggregationMode mode, const UnionOptions& options) {
  return LevelAggregator(taxonomy, mode, options).AllLevels(leaf_probs);
}

ProbVector SumAggregate(const ProbVector& p, const Taxonomy& taxonomy) {
  CheckAggregable(p, taxonomy);
  if (!p.distribution) {
    throw Error(ErrorCode::kNotADistribution,
                "sum aggregation needs a distribution-tagged vector");
  }
  ValidateProbVector(p);
  return {p.level + 1, SumStep(p.values, taxonomy, p.level), true};
}

ProbVector UnionAggregate(const ProbVector& p, const Taxonomy& taxonomy,
                          const UnionOptions& options) {
  CheckAggregable(p, taxonomy);
  ValidateProbVector(p);
  return {p.level + 1, UnionPlan(taxonomy, p.level, options).Apply(p.values),
          false};
}

ProbVector UnionAggregateOracle(const ProbVector& p, const Taxonomy& taxonomy) {
  CheckAggregable(p, taxonomy);
  const std::size_t num_parents = taxonomy.num_classes(p.level + 1);
  ProbVector out{p.level + 1, std::vector<double>(num_parents), false};
  for (std::size_t i = 0; i < num_parents; ++i) {
    out.values[i] =
        ComplementProduct(p.values, taxonomy.children(p.level + 1, i));
  }
  return out;
}

DenseMatrix SumJacobian(const Taxonomy& taxonomy, int level) {
  CheckTransitionLevel(taxonomy, level);
  return taxonomy.transition_matrix(level).ToDense().Transposed();
}

std::vector<double> UnionSiblingComplements(std::span<const double> probs,
                                            const Taxonomy& taxonomy,
                                            int level) {
  CheckTransitionLevel(taxonomy, level);
  CheckLength(probs, taxonomy, level);
  std::vector<double> out(probs.size(), 0.0);
  const std::size_t num_parents = taxonomy.num_classes(level + 1);
  for (std::size_t i = 0; i < num_parents; ++i) {
    auto kids = taxonomy.children(level + 1, i);
    // Prefix/suffix products avoid dividing by (1 - p_k), which may be 0.
    std::vector<double> suffix(kids.size() + 1, 1.0);
    for (std::size_t j = kids.size(); j-- > 0;) {
      suffix[j] = suffix[j + 1] * (1.0 - probs[kids[j]]);
    }
    double prefix = 1.0;
    for (std::size_t j = 0; j < kids.size(); ++j) {
      out[kids[j]] = prefix * suffix[j + 1];
      prefix *= 1.0 - probs[kids[j]];
    }
  }
  return out;
}

DenseMatrix UnionJacobian(const ProbVector& p, const Taxonomy& taxonomy) {
  CheckAggregable(p, taxonomy);
  ValidateProbVector(p);
  const std::vector<double> column =
      UnionSiblingComplements(p.values, taxonomy, p.level);
  const LevelMatrix m = taxonomy.transition_matrix(p.level);
  DenseMatrix jac(m.cols(), m.rows());
  for (std::size_t k = 0; k < m.rows(); ++k) jac(m.parent_of(k), k) = column[k];
  return jac;
}

std::vector<double> Softmax(std::span<const double> logits) {
  std::vector<double> out(logits.size());
  if (logits.empty()) return out;
  const double top = *std::max_element(logits.begin(), logits.end());
  double total = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    out[i] = std::exp(logits[i] - top);
    total += out[i];
  }
  for (double& v : out) v /= total;
  return out;
}

std::vector<double> Sigmoid(std::span<const double> logits) {
  std::vector<double> out(logits.size());
  for (std::size_t i = 0; i < logits.size(); ++i) {
    const double z = logits[i];
    if (z >= 0) {
      out[i] = 1.0 / (1.0 + std::exp(-z));
    } else {
      const double e = std::exp(z);
      out[i] = e / (1.0 + e);
    }
  }
  return out;
}

}  // namespace hierloss
