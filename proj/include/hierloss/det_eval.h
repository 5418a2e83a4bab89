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
// Detection evaluation at every level of a taxonomy.
//
// For level l, every detection's leaf scores are aggregated to level l, NMS
// is recomputed on the aggregated scores, and COCO-style AP (101-point
// interpolation, averaged over IoU thresholds) is taken per level-l class
// against the ground truth mapped to level l. Re-running NMS per level lets
// boxes that lost at the leaf level come back once sibling scores merge.
#ifndef HIERLOSS_DET_EVAL_H_
#define HIERLOSS_DET_EVAL_H_

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "hierloss/aggregation.h"
#include "hierloss/taxonomy.h"

namespace hierloss {

// Axis-aligned box, (x, y) is the top-left corner.
struct BBox {
  double x = 0.0;
  double y = 0.0;
  double width = 0.0;
  double height = 0.0;

  auto operator<=>(const BBox&) const = default;
};

double Iou(const BBox& a, const BBox& b);

struct ScoredBox {
  BBox box;
  double score = 0.0;
};

// Greedy NMS. Boxes are visited by descending score (ties: lower index
// first); a box is dropped when its IoU with an already kept box exceeds
// `iou_threshold`. Returns kept indices in visiting order.
std::vector<std::size_t> Nms(std::span<const ScoredBox> boxes,
                             double iou_threshold);

struct DetBox {
  std::string image_id;
  BBox bbox;
  std::vector<double> leaf_scores;
};

struct GtBox {
  std::string image_id;
  BBox bbox;
  std::size_t leaf_label = 0;
};

using DetectionSet = std::vector<DetBox>;

struct GroundTruthSet {
  std::vector<std::string> image_ids;
  std::vector<GtBox> annotations;
};

struct EvalConfig {
  std::vector<double> iou_thresholds = {0.50, 0.55, 0.60, 0.65, 0.70,
                                        0.75, 0.80, 0.85, 0.90, 0.95};
  double nms_iou = 0.5;
  double score_floor = 0.05;
  std::size_t max_dets_per_image = 100;
  bool class_agnostic_nms = false;

  // Throws kConfig on out-of-range or unsorted values.
  void Validate() const;
};

struct LevelDetection {
  BBox bbox;
  std::size_t class_index = 0;
  double score = 0.0;
  // Position of the originating DetBox in the input list.
  std::size_t source = 0;
};

std::vector<double> AggregateScoresToLevel(const DetBox& det,
                                           const Taxonomy& taxonomy, int level,
                                           AggregationMode mode);

// Post-processing of one image's detections at every level. Each box yields
// one candidate per class scoring at least `score_floor`; candidates go
// through class-wise NMS (class-agnostic if configured) and the best
// `max_dets_per_image` survive. Element l - 1 holds level l, sorted by
// descending score.
std::vector<std::vector<LevelDetection>> MultiLevelNms(
    std::span<const DetBox> image_dets, const LevelAggregator& aggregator,
    const EvalConfig& config);
std::vector<std::vector<LevelDetection>> MultiLevelNms(
    std::span<const DetBox> image_dets, const Taxonomy& taxonomy,
    AggregationMode mode, const EvalConfig& config);

// 101-point interpolated AP of one class at one IoU threshold.
// `is_true_positive` lists the detections by descending score. Returns
// nullopt when there is neither ground truth nor a detection, 0 when there
// are detections but no ground truth.
std::optional<double> AveragePrecision(
    const std::vector<bool>& is_true_positive, std::size_t num_gt);

struct LevelEvalReport {
  // mAP at level l is per_level_map[l - 1].
  std::vector<double> per_level_map;
  // Per level: class index -> AP averaged over the IoU thresholds, for the
  // classes that have ground truth at that level.
  std::vector<std::map<std::size_t, double>> per_class_ap;
};

// Throws kEmptyGroundTruth without annotations and kDataMismatch when a
// detection references an unknown image or has the wrong score length.
LevelEvalReport MultiLevelMap(const DetectionSet& dets,
                              const GroundTruthSet& gts,
                              const Taxonomy& taxonomy, AggregationMode mode,
                              const EvalConfig& config);

}  // namespace hierloss

#endif  // HIERLOSS_DET_EVAL_H_
