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
// Moving class probabilities one level up a taxonomy.
//
// Sum aggregation adds the children of every parent and is exact for
// mutually exclusive (softmax) outputs. Union aggregation computes the
// probability that at least one child fires, for independent (sigmoid)
// outputs, by the inclusion-exclusion expansion over every non-empty subset
// of siblings where each intersection is the product of its members. Under
// that independence reading the union equals 1 - prod(1 - p), which is kept
// as a separate oracle path.
#ifndef HIERLOSS_AGGREGATION_H_
#define HIERLOSS_AGGREGATION_H_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "hierloss/matrix.h"
#include "hierloss/taxonomy.h"

namespace hierloss {

enum class AggregationMode { kSum, kUnion };

std::string_view AggregationModeName(AggregationMode mode);
std::optional<AggregationMode> ParseAggregationMode(std::string_view name);

inline constexpr double kDistributionTolerance = 1e-6;

// Class probabilities of one instance at one taxonomy level. `distribution`
// marks softmax-style vectors whose entries must sum to one.
struct ProbVector {
  int level = 1;
  std::vector<double> values;
  bool distribution = false;
};

// Throws kInvalidProbability for entries outside [0, 1] and
// kNotADistribution when a distribution-tagged vector does not sum to 1.
void ValidateProbVector(const ProbVector& p);

enum class ChildLimitPolicy {
  // Parents above the limit use the complement product, which is equal to
  // the enumeration in exact arithmetic.
  kComplementProduct,
  kThrow,
};

struct UnionOptions {
  std::size_t max_enumerated_children = 20;
  ChildLimitPolicy on_limit = ChildLimitPolicy::kComplementProduct;
};

// Inclusion-exclusion plan for the transition from `level` to `level + 1`.
// For every parent, the non-empty subsets of its children are precomputed as
// bit masks grouped by size; evaluation costs O(2^N * N) per parent with N
// children. Immutable after construction.
class UnionPlan {
 public:
  UnionPlan(const Taxonomy& taxonomy, int level, UnionOptions options = {});

  int level() const { return level_; }
  std::size_t num_children() const { return num_children_; }
  std::size_t num_parents() const { return parents_.size(); }

  // Level-(l+1) union probabilities, clamped to [0, 1]. No validation beyond
  // the input length.
  std::vector<double> Apply(std::span<const double> child_probs) const;

 private:
  struct ParentPlan {
    std::vector<std::size_t> children;
    bool enumerate = true;
    // subsets_by_size[m - 1] holds the masks with m bits set, ascending.
    std::vector<std::vector<std::uint32_t>> subsets_by_size;
  };

  int level_;
  std::size_t num_children_;
  std::vector<ParentPlan> parents_;
};

// One aggregation step on raw values: level-`level` vector in, level+1 out.
// Only the length is checked. Sum is the product with the transition matrix.
std::vector<double> AggregateStep(std::span<const double> probs,
                                  const Taxonomy& taxonomy, int level,
                                  AggregationMode mode,
                                  const UnionOptions& options = {});

// Aggregates through every level of one taxonomy with the union plans built
// once. Keeps a reference to the taxonomy, which must outlive it.
class LevelAggregator {
 public:
  LevelAggregator(const Taxonomy& taxonomy, AggregationMode mode,
                  UnionOptions options = {});

  AggregationMode mode() const { return mode_; }
  const Taxonomy& taxonomy() const { return *taxonomy_; }

  std::vector<double> Step(std::span<const double> probs, int level) const;
  // Element l - 1 is the level-l vector.
  std::vector<std::vector<double>> AllLevels(
      std::span<const double> leaf_probs) const;
  std::vector<double> ToLevel(std::span<const double> leaf_probs,
                              int level) const;

 private:
  const Taxonomy* taxonomy_;
  AggregationMode mode_;
  std::vector<UnionPlan> plans_;
};

// Folds leaf values through every level. Element l - 1 is the level-l vector.
std::vector<std::vector<double>> AggregateAllLevels(
    std::span<const double> leaf_probs, const Taxonomy& taxonomy,
    AggregationMode mode, const UnionOptions& options = {});

ProbVector SumAggregate(const ProbVector& p, const Taxonomy& taxonomy);
ProbVector UnionAggregate(const ProbVector& p, const Taxonomy& taxonomy,
                          const UnionOptions& options = {});

// 1 - prod(1 - p) over each parent's children, multiplied in child order.
ProbVector UnionAggregateOracle(const ProbVector& p, const Taxonomy& taxonomy);

// d(level l+1) / d(level l); K_{l+1} x K_l. Constant for sum aggregation.
DenseMatrix SumJacobian(const Taxonomy& taxonomy, int level);
DenseMatrix UnionJacobian(const ProbVector& p, const Taxonomy& taxonomy);

// For each child k: product of (1 - p_j) over its siblings j != k. This is
// the only nonzero entry of column k of the union Jacobian.
std::vector<double> UnionSiblingComplements(std::span<const double> probs,
                                            const Taxonomy& taxonomy,
                                            int level);

std::vector<double> Softmax(std::span<const double> logits);
std::vector<double> Sigmoid(std::span<const double> logits);

}  // namespace hierloss

#endif  // HIERLOSS_AGGREGATION_H_
