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
// Small end-to-end training demo: a linear classifier on 2-D points trained
// by full-batch gradient descent with either the plain leaf loss or the
// hierarchical loss, tracking top-1 error and mistake severity on a held-out
// split.
#ifndef HIERLOSS_TRAIN_DEMO_H_
#define HIERLOSS_TRAIN_DEMO_H_

#include <array>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "hierloss/aggregation.h"
#include "hierloss/losses.h"
#include "hierloss/taxonomy.h"

namespace hierloss {

using Point2 = std::array<double, 2>;

struct LabeledPoint {
  Point2 x{};
  std::size_t leaf = 0;
};

struct DemoDataset {
  std::vector<LabeledPoint> train;
  std::vector<LabeledPoint> test;
};

struct DemoDatasetConfig {
  // One center per leaf; empty selects DefaultClusterCenters.
  std::vector<Point2> centers;
  double stddev = 1.0;
  std::size_t train_per_class = 100;
  std::size_t test_per_class = 100;
};

// Leaves of the same level-2 group sit close together, groups further apart:
// group g of G lies at radius `group_radius` and angle 2*pi*g/G, its leaves
// on a circle of radius `leaf_radius` around it.
std::vector<Point2> DefaultClusterCenters(const Taxonomy& taxonomy,
                                          double group_radius = 4.0,
                                          double leaf_radius = 1.0);

// Isotropic Gaussian clusters, one per leaf. Deterministic given the seed.
DemoDataset MakeGaussianClusters(const Taxonomy& taxonomy,
                                 const DemoDatasetConfig& config,
                                 std::uint64_t seed);

enum class DemoLoss {
  // Leaf-level loss only: cross-entropy on softmax outputs, or the base loss
  // on sigmoid outputs.
  kPlain,
  kHierarchical,
};

struct TrainConfig {
  DemoLoss loss = DemoLoss::kPlain;
  // Sum trains a softmax classifier, union a per-class sigmoid one.
  AggregationMode mode = AggregationMode::kSum;
  BaseLoss base;
  LevelWeights weights;  // used by kHierarchical only
  int steps = 200;
  double step_size = 0.5;
  std::uint64_t seed = 0;
};

// Logits are weights[c] . (x0, x1, 1).
struct LinearModel {
  std::vector<std::array<double, 3>> weights;

  std::vector<double> Logits(const Point2& x) const;
};

struct EpochMetrics {
  int step = 0;
  double train_loss = 0.0;
  double top1_error = 0.0;
  double avg_mistake_lca = 0.0;
  std::size_t num_mistakes = 0;
};

struct TrainResult {
  LinearModel model;
  std::vector<EpochMetrics> trace;
};

// Throws kConfig for invalid settings or labels.
TrainResult TrainDemo(const DemoDataset& data, const Taxonomy& taxonomy,
                      const TrainConfig& config);

// "step,train_loss,top1_error,avg_mistake_lca,num_mistakes" rows.
std::string TraceToCsv(const std::vector<EpochMetrics>& trace);

}  // namespace hierloss

#endif  // HIERLOSS_TRAIN_DEMO_H_
