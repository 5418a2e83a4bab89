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
// JSON file formats: ground truth, detections, classification predictions,
// probability batches, run configuration and the evaluation report.
#ifndef HIERLOSS_IO_H_
#define HIERLOSS_IO_H_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "hierloss/aggregation.h"
#include "hierloss/cls_eval.h"
#include "hierloss/det_eval.h"
#include "hierloss/losses.h"
#include "hierloss/taxonomy.h"
#include "hierloss/train_demo.h"

namespace hierloss {

std::string ReadTextFile(const std::filesystem::path& path);
void WriteTextFile(const std::filesystem::path& path, std::string_view text);

// {"images": [{id, width, height}],
//  "annotations": [{image_id, bbox: [x, y, w, h], leaf_label}]}
// Labels are leaf indices or leaf ids.
GroundTruthSet ParseGroundTruth(std::string_view document,
                                const Taxonomy& taxonomy);

// [{image_id, bbox, leaf_scores: [...]}] or the sparse
// [{image_id, bbox, leaf_label, score}]. Sparse entries sharing an image and
// a box are merged into one dense detection.
DetectionSet ParseDetections(std::string_view document,
                             const Taxonomy& taxonomy);

// [{sample_id, true_leaf, leaf_scores | top_k: [[leaf, score], ...]}].
// Leaves missing from a top_k list get the lowest representable score.
std::vector<ClsPrediction> ParsePredictions(std::string_view document,
                                            const Taxonomy& taxonomy);

// A single vector [p, ...], a batch [[p, ...], ...], or {"probs": batch}.
std::vector<std::vector<double>> ParseProbabilityBatch(
    std::string_view document);

// {mode, base, weights | scheme | exp_alpha, focal: {gamma, alpha_balance}}
struct LossConfig {
  AggregationMode mode = AggregationMode::kSum;
  BaseLoss base;
  std::optional<LevelWeights> weights;
  std::optional<WeightScheme> scheme;
  std::optional<double> exp_alpha;

  // Explicit weights, the named scheme, exp decay, or all ones.
  LevelWeights ResolveWeights(int depth) const;
};

struct TrainSettings {
  DemoLoss loss = DemoLoss::kHierarchical;
  int steps = 200;
  double step_size = 0.5;
  DemoDatasetConfig dataset;
};

struct RunConfig {
  std::optional<std::string> taxonomy_path;
  std::optional<std::string> output_path;
  std::uint64_t seed = 0;
  LossConfig loss;
  EvalConfig eval;
  // Aggregation used for detection scores.
  AggregationMode eval_mode = AggregationMode::kUnion;
  TrainSettings train;
};

// Throws Error(kConfig) on malformed or invalid configuration.
RunConfig ParseRunConfig(std::string_view document);
LossConfig ParseLossConfig(std::string_view document);

std::string ReportToJson(const LevelEvalReport& report,
                         const Taxonomy& taxonomy, AggregationMode mode,
                         const EvalConfig& config);

}  // namespace hierloss

#endif  // HIERLOSS_IO_H_
