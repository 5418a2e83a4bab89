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
#include <cmath>
#include <cstdio>
#include <numeric>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "hierloss/error.h"
#include "test_util.h"

namespace hierloss {
namespace {

using testing::RandomTree;
using testing::SevenNode;
using testing::ThreeNode;

// One parent with n leaf children.
Taxonomy Star(int n) {
  std::vector<TaxonomyNode> nodes = {{"root", "", std::nullopt, 2}};
  for (int i = 0; i < n; ++i) {
    char id[8];
    std::snprintf(id, sizeof(id), "k%02d", i);
    nodes.push_back({id, "", "root", 1});
  }
  return Taxonomy::FromNodes(nodes);
}

// Leaves a, b under their own parents pa, pb, joined at the root.
Taxonomy IdentityTransition() {
  return Taxonomy::FromNodes({{"root", "", std::nullopt, 3},
                              {"pa", "", "root", 2},
                              {"pb", "", "root", 2},
                              {"a", "", "pa", 1},
                              {"b", "", "pb", 1}});
}

ProbVector Scores(std::vector<double> v) { return {1, std::move(v), false}; }
ProbVector Dist(std::vector<double> v) { return {1, std::move(v), true}; }

TEST(SumAggregateTest, AddsChildren) {
  // parents [A, A, B]
  const Taxonomy t = Taxonomy::FromNodes({{"r", "", std::nullopt, 3},
                                          {"A", "", "r", 2},
                                          {"B", "", "r", 2},
                                          {"x", "", "A", 1},
                                          {"y", "", "A", 1},
                                          {"z", "", "B", 1}});
  const ProbVector out = SumAggregate(Dist({0.2, 0.3, 0.5}), t);
  EXPECT_EQ(out.level, 2);
  EXPECT_TRUE(out.distribution);
  ASSERT_EQ(out.values.size(), 2u);
  EXPECT_DOUBLE_EQ(out.values[0], 0.5);
  EXPECT_DOUBLE_EQ(out.values[1], 0.5);
}

TEST(SumAggregateTest, OneHotAndUniform) {
  const Taxonomy t = SevenNode();
  EXPECT_EQ(SumAggregate(Dist({0, 0, 1, 0}), t).values,
            (std::vector<double>{0, 1}));
  EXPECT_EQ(SumAggregate(Dist({0.25, 0.25, 0.25, 0.25}), t).values,
            (std::vector<double>{0.5, 0.5}));
}

TEST(SumAggregateTest, Errors) {
  const Taxonomy t = SevenNode();
  auto code = [&](ProbVector p) {
    try {
      SumAggregate(p, t);
    } catch (const Error& e) {
      return e.code();
    }
    return ErrorCode::kIo;
  };
  EXPECT_EQ(code(Dist({0.5, 0.5, 0.5, 0.5})), ErrorCode::kNotADistribution);
  EXPECT_EQ(code(Scores({0.25, 0.25, 0.25, 0.25})),
            ErrorCode::kNotADistribution);
  EXPECT_EQ(code(Dist({0.5, 0.5})), ErrorCode::kLevelMismatch);
  EXPECT_EQ(code({3, {1.0}, true}), ErrorCode::kLevelMismatch);
  EXPECT_EQ(code(Dist({1.5, -0.5, 0, 0})), ErrorCode::kInvalidProbability);
}

TEST(UnionAggregateTest, FixedValues) {
  EXPECT_DOUBLE_EQ(UnionAggregate(Scores({0.7}), Star(1)).values[0], 0.7);
  EXPECT_DOUBLE_EQ(UnionAggregate(Scores({0.5, 0.5}), Star(2)).values[0], 0.75);
  EXPECT_NEAR(UnionAggregate(Scores({0.3, 0.4, 0.5}), Star(3)).values[0], 0.79,
              1e-15);
  EXPECT_EQ(UnionAggregate(Scores({0.0, 0.0, 0.0}), Star(3)).values[0], 0.0);
}

TEST(UnionAggregateTest, OracleFixedValues) {
  EXPECT_DOUBLE_EQ(UnionAggregateOracle(Scores({0.5, 0.5}), Star(2)).values[0],
                   0.75);
  for (double x : {0.0, 0.3, 1.0}) {
    EXPECT_EQ(UnionAggregateOracle(Scores({1.0, x}), Star(2)).values[0], 1.0);
  }
  const ProbVector ten = Scores(std::vector<double>(10, 0.1));
  EXPECT_NEAR(UnionAggregateOracle(ten, Star(10)).values[0], 0.6513215599,
              1e-10);
  EXPECT_NEAR(UnionAggregate(ten, Star(10)).values[0], 0.6513215599, 1e-10);
}

TEST(UnionAggregateTest, ChildLimit) {
  const Taxonomy t = Star(6);
  const ProbVector p = Scores({0.1, 0.2, 0.3, 0.4, 0.5, 0.6});
  UnionOptions strict{4, ChildLimitPolicy::kThrow};
  try {
    UnionAggregate(p, t, strict);
    FAIL() << "expected ChildrenCountExceedsLimit";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kChildrenCountExceedsLimit);
  }
  UnionOptions fallback{4, ChildLimitPolicy::kComplementProduct};
  EXPECT_NEAR(UnionAggregate(p, t, fallback).values[0],
              UnionAggregate(p, t).values[0], 1e-15);
  EXPECT_EQ(UnionAggregate(p, t, fallback).values[0],
            UnionAggregateOracle(p, t).values[0]);
}

TEST(UnionAggregateTest, TwentyChildrenEnumerated) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> v(20);
  for (double& x : v) x = u(rng);
  const Taxonomy t = Star(20);
  EXPECT_NEAR(UnionAggregate(Scores(v), t).values[0],
              UnionAggregateOracle(Scores(v), t).values[0], 1e-9);
}

TEST(JacobianTest, SumJacobian) {
  DenseMatrix ones(1, 2);
  ones(0, 0) = ones(0, 1) = 1.0;
  EXPECT_EQ(SumJacobian(ThreeNode(), 1), ones);

  const Taxonomy t = SevenNode();
  EXPECT_EQ(SumJacobian(t, 1), t.transition_matrix(1).ToDense().Transposed());
  EXPECT_EQ(SumJacobian(t, 1)(1, 2), 1.0);
  EXPECT_EQ(SumJacobian(t, 1)(0, 2), 0.0);

  DenseMatrix identity(2, 2);
  identity(0, 0) = identity(1, 1) = 1.0;
  EXPECT_EQ(SumJacobian(IdentityTransition(), 1), identity);
  EXPECT_THROW(SumJacobian(t, 3), Error);
}

TEST(JacobianTest, UnionJacobian) {
  EXPECT_EQ(UnionJacobian(Scores({0.4}), Star(1))(0, 0), 1.0);
  const DenseMatrix half = UnionJacobian(Scores({0.5, 0.5}), Star(2));
  EXPECT_DOUBLE_EQ(half(0, 0), 0.5);
  EXPECT_DOUBLE_EQ(half(0, 1), 0.5);
  const DenseMatrix saturated =
      UnionJacobian(Scores({0.3, 1.0, 0.2}), Star(3));
  EXPECT_EQ(saturated(0, 0), 0.0);
  EXPECT_EQ(saturated(0, 2), 0.0);
  EXPECT_DOUBLE_EQ(saturated(0, 1), 0.7 * 0.8);

  const DenseMatrix fixture =
      UnionJacobian(Scores({0.1, 0.2, 0.3, 0.4}), SevenNode());
  EXPECT_DOUBLE_EQ(fixture(0, 0), 0.8);
  EXPECT_DOUBLE_EQ(fixture(0, 1), 0.9);
  EXPECT_DOUBLE_EQ(fixture(1, 2), 0.6);
  EXPECT_DOUBLE_EQ(fixture(1, 3), 0.7);
  EXPECT_EQ(fixture(0, 2), 0.0);
  EXPECT_EQ(fixture(1, 0), 0.0);
}

TEST(SoftmaxTest, NormalizesAndIsShiftInvariant) {
  const std::vector<double> a = Softmax(std::vector<double>{1.0, 2.0, 3.0});
  const std::vector<double> b = Softmax(std::vector<double>{1001.0, 1002.0, 1003.0});
  EXPECT_NEAR(std::accumulate(a.begin(), a.end(), 0.0), 1.0, 1e-15);
  for (int i = 0; i < 3; ++i) EXPECT_NEAR(a[i], b[i], 1e-15);
  const std::vector<double> s = Sigmoid(std::vector<double>{0.0, -800.0, 800.0});
  EXPECT_EQ(s[0], 0.5);
  EXPECT_EQ(s[1], 0.0);
  EXPECT_EQ(s[2], 1.0);
}

class AggregationPropertyTest : public ::testing::Test {
 protected:
  std::vector<double> RandomScores(std::size_t n) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<double> v(n);
    for (double& x : v) x = u(rng_);
    return v;
  }
  std::mt19937_64 rng_{2024};
};

TEST_F(AggregationPropertyTest, UnionMatchesOracleAndBounds) {
  for (int trial = 0; trial < 200; ++trial) {
    const Taxonomy t = RandomTree(rng_, 2 + trial % 3, 10);
    const ProbVector p = Scores(RandomScores(t.num_leaves()));
    const ProbVector u = UnionAggregate(p, t);
    const ProbVector o = UnionAggregateOracle(p, t);
    for (std::size_t i = 0; i < u.values.size(); ++i) {
      EXPECT_NEAR(u.values[i], o.values[i], 1e-9);
      double max_child = 0.0;
      double sum_child = 0.0;
      for (std::size_t k : t.children(2, i)) {
        max_child = std::max(max_child, p.values[k]);
        sum_child += p.values[k];
      }
      EXPECT_GE(u.values[i], max_child - 1e-12);
      EXPECT_LE(u.values[i], std::min(1.0, sum_child) + 1e-12);
    }
  }
}

TEST_F(AggregationPropertyTest, SoftmaxSumIsUnionSpecialCase) {
  for (int trial = 0; trial < 200; ++trial) {
    const Taxonomy t = RandomTree(rng_, 2 + trial % 3, 6);
    // At most one nonzero child per parent, then normalized.
    std::vector<double> v(t.num_leaves(), 0.0);
    for (std::size_t i = 0; i < t.num_classes(2); ++i) {
      auto kids = t.children(2, i);
      if (rng_() % 3 == 0) continue;
      v[kids[rng_() % kids.size()]] = RandomScores(1)[0] + 0.01;
    }
    const double total = std::accumulate(v.begin(), v.end(), 0.0);
    if (total == 0.0) v[0] = 1.0;
    for (double& x : v) x /= total == 0.0 ? 1.0 : total;
    ProbVector dist = Dist(v);
    dist.distribution = std::abs(std::accumulate(v.begin(), v.end(), 0.0) - 1.0) <
                        kDistributionTolerance;
    ASSERT_TRUE(dist.distribution);
    EXPECT_EQ(UnionAggregate(dist, t).values, SumAggregate(dist, t).values);
  }
}

TEST_F(AggregationPropertyTest, UnionIsMonotone) {
  for (int trial = 0; trial < 100; ++trial) {
    const Taxonomy t = RandomTree(rng_, 2, 8);
    std::vector<double> v = RandomScores(t.num_leaves());
    const std::vector<double> before = UnionAggregate(Scores(v), t).values;
    const std::size_t k = rng_() % v.size();
    v[k] = v[k] + (1.0 - v[k]) * RandomScores(1)[0];
    const std::vector<double> after = UnionAggregate(Scores(v), t).values;
    const std::size_t parent = t.parent_index(1, k);
    EXPECT_GE(after[parent], before[parent] - 1e-12);
  }
}

TEST_F(AggregationPropertyTest, UnionJacobianMatchesFiniteDifferences) {
  const double h = 1e-5;
  for (int trial = 0; trial < 100; ++trial) {
    const Taxonomy t = RandomTree(rng_, 2, 6);
    std::vector<double> v = RandomScores(t.num_leaves());
    for (double& x : v) x = 0.01 + 0.98 * x;
    const DenseMatrix jac = UnionJacobian(Scores(v), t);
    for (std::size_t k = 0; k < v.size(); ++k) {
      std::vector<double> up = v, down = v;
      up[k] += h;
      down[k] -= h;
      const auto fu = UnionAggregateOracle(Scores(up), t).values;
      const auto fd = UnionAggregateOracle(Scores(down), t).values;
      for (std::size_t i = 0; i < fu.size(); ++i) {
        const double numeric = (fu[i] - fd[i]) / (2 * h);
        const double scale = std::max(std::abs(numeric), std::abs(jac(i, k)));
        const double err = std::abs(numeric - jac(i, k));
        EXPECT_LT(scale < 1e-8 ? err : err / scale, 1e-5);
      }
    }
  }
}

TEST_F(AggregationPropertyTest, SumPreservesMass) {
  for (int trial = 0; trial < 100; ++trial) {
    const Taxonomy t = RandomTree(rng_, 2 + trial % 3, 7);
    std::vector<double> v = RandomScores(t.num_leaves());
    const double total = std::accumulate(v.begin(), v.end(), 0.0);
    for (double& x : v) x /= total;
    const ProbVector out = SumAggregate(Dist(v), t);
    EXPECT_NEAR(std::accumulate(out.values.begin(), out.values.end(), 0.0),
                std::accumulate(v.begin(), v.end(), 0.0), 1e-12);
  }
}

TEST_F(AggregationPropertyTest, AllLevelsFoldsStepwise) {
  const Taxonomy t = SevenNode();
  const std::vector<double> v = {0.1, 0.2, 0.3, 0.4};
  const auto levels = AggregateAllLevels(v, t, AggregationMode::kUnion);
  ASSERT_EQ(levels.size(), 3u);
  EXPECT_EQ(levels[0], v);
  EXPECT_NEAR(levels[1][0], 1 - 0.9 * 0.8, 1e-15);
  EXPECT_NEAR(levels[1][1], 1 - 0.7 * 0.6, 1e-15);
  EXPECT_NEAR(levels[2][0], 1 - (0.9 * 0.8) * (0.7 * 0.6), 1e-15);
  const LevelAggregator agg(t, AggregationMode::kSum);
  EXPECT_EQ(agg.ToLevel(v, 1), v);
  EXPECT_NEAR(agg.ToLevel(v, 3)[0], 1.0, 1e-15);
  EXPECT_THROW(agg.ToLevel(v, 4), Error);
}

}  // namespace
}  // namespace hierloss
