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
#include "hierloss/train_demo.h"

#include <cmath>
#include <cstdio>
#include <numbers>
#include <random>
#include <string>

#include "hierloss/cls_eval.h"
#include "hierloss/error.h"

namespace hierloss {

namespace {

[[noreturn]] void BadConfig(const std::string& message) {
  throw Error(ErrorCode::kConfig, message);
}

void CheckLabels(const std::vector<LabeledPoint>& points,
                 const Taxonomy& taxonomy) {
  for (const LabeledPoint& p : points) {
    if (p.leaf >= taxonomy.num_leaves()) {
      BadConfig("sample label " + std::to_string(p.leaf) + " out of range");
    }
  }
}

// Chains dL/dp through the output function to dL/dlogits.
std::vector<double> LogitGradient(const std::vector<double>& probs,
                                  const std::vector<double>& grad_probs,
                                  AggregationMode mode) {
  std::vector<double> out(probs.size());
  if (mode == AggregationMode::kSum) {
    double dot = 0.0;
    for (std::size_t j = 0; j < probs.size(); ++j) dot += grad_probs[j] * probs[j];
    for (std::size_t i = 0; i < probs.size(); ++i) {
      out[i] = probs[i] * (grad_probs[i] - dot);
    }
  } else {
    for (std::size_t i = 0; i < probs.size(); ++i) {
      out[i] = grad_probs[i] * probs[i] * (1.0 - probs[i]);
    }
  }
  return out;
}

std::vector<double> Outputs(const LinearModel& model, const Point2& x,
                            AggregationMode mode) {
  const auto logits = model.Logits(x);
  return mode == AggregationMode::kSum ? Softmax(logits) : Sigmoid(logits);
}

}  // namespace

std::vector<Point2> DefaultClusterCenters(const Taxonomy& taxonomy,
                                          double group_radius,
                                          double leaf_radius) {
  const std::size_t leaves = taxonomy.num_leaves();
  std::vector<Point2> centers(leaves);
  if (taxonomy.levels() < 2) {
    for (std::size_t k = 0; k < leaves; ++k) {
      const double angle = 2.0 * std::numbers::pi * k / leaves;
      centers[k] = {group_radius * std::cos(angle),
                    group_radius * std::sin(angle)};
    }
    return centers;
  }
  const std::size_t groups = taxonomy.num_classes(2);
  for (std::size_t g = 0; g < groups; ++g) {
    const double angle = 2.0 * std::numbers::pi * g / groups;
    const Point2 anchor = {group_radius * std::cos(angle),
                           group_radius * std::sin(angle)};
    auto kids = taxonomy.children(2, g);
    for (std::size_t j = 0; j < kids.size(); ++j) {
      const double a = 2.0 * std::numbers::pi * j / kids.size();
      centers[kids[j]] = {anchor[0] + leaf_radius * std::cos(a),
                          anchor[1] + leaf_radius * std::sin(a)};
    }
  }
  return centers;
}

DemoDataset MakeGaussianClusters(const Taxonomy& taxonomy,
                                 const DemoDatasetConfig& config,
                                 std::uint64_t seed) {
  const std::vector<Point2> centers = config.centers.empty()
                                          ? DefaultClusterCenters(taxonomy)
                                          : config.centers;
  if (centers.size() != taxonomy.num_leaves()) {
    BadConfig("need one cluster center per leaf");
  }
  if (!(config.stddev > 0.0)) BadConfig("stddev must be > 0");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, config.stddev);
  DemoDataset data;
  auto fill = [&](std::vector<LabeledPoint>& out, std::size_t per_class) {
    for (std::size_t leaf = 0; leaf < centers.size(); ++leaf) {
      for (std::size_t i = 0; i < per_class; ++i) {
        const double dx = noise(rng);
        const double dy = noise(rng);
        out.push_back({{centers[leaf][0] + dx, centers[leaf][1] + dy}, leaf});
      }
    }
  };
  fill(data.train, config.train_per_class);
  fill(data.test, config.test_per_class);
  return data;
}

std::vector<double> LinearModel::Logits(const Point2& x) const {
  std::vector<double> out(weights.size());
  for (std::size_t c = 0; c < weights.size(); ++c) {
    out[c] = weights[c][0] * x[0] + weights[c][1] * x[1] + weights[c][2];
  }
  return out;
}

TrainResult TrainDemo(const DemoDataset& data, const Taxonomy& taxonomy,
                      const TrainConfig& config) {
  if (config.steps < 1) BadConfig("steps must be >= 1");
  if (!(config.step_size > 0.0)) BadConfig("step_size must be > 0");
  if (data.train.empty() || data.test.empty()) {
    BadConfig("train and test splits must be non-empty");
  }
  CheckLabels(data.train, taxonomy);
  CheckLabels(data.test, taxonomy);
  if (config.mode == AggregationMode::kSum &&
      config.base.kind != BaseLossKind::kCrossEntropy) {
    BadConfig("a softmax classifier trains with cross-entropy");
  }

  std::optional<HierarchicalObjective> objective;
  if (config.loss == DemoLoss::kHierarchical) {
    objective.emplace(taxonomy, config.weights, config.mode, config.base);
  } else if (config.base.kind == BaseLossKind::kFocal) {
    ValidateFocalParams(config.base.focal);
  }
  std::vector<TargetSpec> targets;
  for (std::size_t leaf = 0; leaf < taxonomy.num_leaves(); ++leaf) {
    targets.push_back(MakeTarget(taxonomy, leaf));
  }

  const std::size_t classes = taxonomy.num_leaves();
  TrainResult result;
  std::mt19937_64 rng(config.seed);
  std::normal_distribution<double> init(0.0, 0.01);
  result.model.weights.resize(classes);
  for (auto& row : result.model.weights)
    for (double& w : row) w = init(rng);

  const double scale = 1.0 / static_cast<double>(data.train.size());
  for (int step = 1; step <= config.steps; ++step) {
    std::vector<std::array<double, 3>> grad(classes, {0.0, 0.0, 0.0});
    double loss_sum = 0.0;
    for (const LabeledPoint& sample : data.train) {
      const auto probs = Outputs(result.model, sample.x, config.mode);
      std::vector<double> grad_probs;
      if (objective) {
        loss_sum += objective->Evaluate(probs, targets[sample.leaf]).total;
        grad_probs = objective->Gradient(probs, targets[sample.leaf]);
      } else if (config.base.kind == BaseLossKind::kCrossEntropy) {
        loss_sum += CrossEntropyValue(probs, sample.leaf);
        grad_probs = CrossEntropyGradient(probs, sample.leaf);
      } else {
        loss_sum += FocalLossValue(probs, sample.leaf, config.base.focal);
        grad_probs = FocalLossGradient(probs, sample.leaf, config.base.focal);
      }
      const auto g = LogitGradient(probs, grad_probs, config.mode);
      for (std::size_t c = 0; c < classes; ++c) {
        grad[c][0] += g[c] * sample.x[0];
        grad[c][1] += g[c] * sample.x[1];
        grad[c][2] += g[c];
      }
    }
    for (std::size_t c = 0; c < classes; ++c)
      for (std::size_t j = 0; j < 3; ++j)
        result.model.weights[c][j] -= config.step_size * scale * grad[c][j];

    std::vector<ClsPrediction> preds;
    preds.reserve(data.test.size());
    for (std::size_t i = 0; i < data.test.size(); ++i) {
      const LabeledPoint& sample = data.test[i];
      preds.push_back({std::to_string(i),
                       Outputs(result.model, sample.x, config.mode),
                       sample.leaf});
    }
    const MistakeSeverity severity = HierDistMistake(preds, taxonomy);
    result.trace.push_back({step, loss_sum * scale, Top1Error(preds),
                            severity.mean_lca_height, severity.num_mistakes});
  }
  return result;
}

std::string TraceToCsv(const std::vector<EpochMetrics>& trace) {
  std::string out = "step,train_loss,top1_error,avg_mistake_lca,num_mistakes\n";
  char line[160];
  for (const EpochMetrics& m : trace) {
    std::snprintf(line, sizeof(line), "%d,%.12g,%.12g,%.12g,%zu\n", m.step,
                  m.train_loss, m.top1_error, m.avg_mistake_lca,
                  m.num_mistakes);
    out += line;
  }
  return out;
}

}  // namespace hierloss
