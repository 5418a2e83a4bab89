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
#include "hierloss/det_eval.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <string>
#include <tuple>
#include <utility>

#include "hierloss/error.h"

namespace hierloss {

namespace {

constexpr int kRecallPoints = 101;

bool ValidBox(const BBox& b) {
  return std::isfinite(b.x) && std::isfinite(b.y) && b.width > 0.0 &&
         b.height > 0.0 && std::isfinite(b.width) && std::isfinite(b.height);
}

// A detection surviving post-processing, tagged for matching.
struct Record {
  double score;
  const std::string* image_id;
  BBox bbox;
  bool true_positive;
};

bool RecordBefore(const Record& a, const Record& b) {
  if (a.score != b.score) return a.score > b.score;
  if (*a.image_id != *b.image_id) return *a.image_id < *b.image_id;
  return a.bbox < b.bbox;
}

bool DetBefore(const DetBox& a, const DetBox& b) {
  return std::tie(a.bbox, a.leaf_scores) < std::tie(b.bbox, b.leaf_scores);
}

bool GtBefore(const GtBox& a, const GtBox& b) {
  return std::tie(a.bbox, a.leaf_label) < std::tie(b.bbox, b.leaf_label);
}

// Greedy matching of score-sorted detections against ground truth: each
// detection takes the unmatched box with the highest IoU >= threshold (ties
// to the lower index).
std::vector<bool> MatchDetections(std::span<const BBox> dets,
                                  std::span<const BBox> gts,
                                  double threshold) {
  std::vector<bool> taken(gts.size(), false);
  std::vector<bool> tp(dets.size(), false);
  for (std::size_t d = 0; d < dets.size(); ++d) {
    std::optional<std::size_t> best;
    double best_iou = threshold;
    for (std::size_t g = 0; g < gts.size(); ++g) {
      if (taken[g]) continue;
      const double overlap = Iou(dets[d], gts[g]);
      if (overlap < best_iou) continue;
      if (best && overlap == best_iou) continue;
      best = g;
      best_iou = overlap;
    }
    if (best) {
      taken[*best] = true;
      tp[d] = true;
    }
  }
  return tp;
}

}  // namespace

double Iou(const BBox& a, const BBox& b) {
  const double iw = std::min(a.x + a.width, b.x + b.width) - std::max(a.x, b.x);
  const double ih =
      std::min(a.y + a.height, b.y + b.height) - std::max(a.y, b.y);
  if (iw <= 0.0 || ih <= 0.0) return 0.0;
  const double inter = iw * ih;
  const double uni = a.width * a.height + b.width * b.height - inter;
  return uni > 0.0 ? inter / uni : 0.0;
}

std::vector<std::size_t> Nms(std::span<const ScoredBox> boxes,
                             double iou_threshold) {
  std::vector<std::size_t> order(boxes.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) {
                     return boxes[a].score > boxes[b].score;
                   });
  std::vector<std::size_t> kept;
  for (std::size_t i : order) {
    bool suppressed = false;
    for (std::size_t k : kept) {
      if (Iou(boxes[i].box, boxes[k].box) > iou_threshold) {
        suppressed = true;
        break;
      }
    }
    if (!suppressed) kept.push_back(i);
  }
  return kept;
}

void EvalConfig::Validate() const {
  if (iou_thresholds.empty()) {
    throw Error(ErrorCode::kConfig, "iou_thresholds is empty");
  }
  for (std::size_t i = 0; i < iou_thresholds.size(); ++i) {
    const double t = iou_thresholds[i];
    if (!(t > 0.0 && t <= 1.0)) {
      throw Error(ErrorCode::kConfig, "IoU thresholds must be in (0, 1]");
    }
    if (i > 0 && t < iou_thresholds[i - 1]) {
      throw Error(ErrorCode::kConfig, "IoU thresholds must be ascending");
    }
  }
  if (!(nms_iou > 0.0 && nms_iou <= 1.0)) {
    throw Error(ErrorCode::kConfig, "nms_iou must be in (0, 1]");
  }
  if (!(score_floor >= 0.0 && score_floor < 1.0)) {
    throw Error(ErrorCode::kConfig, "score_floor must be in [0, 1)");
  }
  if (max_dets_per_image == 0) {
    throw Error(ErrorCode::kConfig, "max_dets_per_image must be positive");
  }
}

std::vector<double> AggregateScoresToLevel(const DetBox& det,
                                           const Taxonomy& taxonomy, int level,
                                           AggregationMode mode) {
  if (level < 1 || level > taxonomy.levels()) {
    throw Error(ErrorCode::kLevelOutOfRange,
                "level " + std::to_string(level) + " outside [1, " +
                    std::to_string(taxonomy.levels()) + "]");
  }
  return LevelAggregator(taxonomy, mode).ToLevel(det.leaf_scores, level);
}

std::vector<std::vector<LevelDetection>> MultiLevelNms(
    std::span<const DetBox> image_dets, const LevelAggregator& aggregator,
    const EvalConfig& config) {
  const Taxonomy& taxonomy = aggregator.taxonomy();
  const int depth = taxonomy.levels();
  std::vector<std::vector<std::vector<double>>> scores;
  scores.reserve(image_dets.size());
  for (const DetBox& det : image_dets) {
    scores.push_back(aggregator.AllLevels(det.leaf_scores));
  }

  std::vector<std::vector<LevelDetection>> out(depth);
  for (int l = 1; l <= depth; ++l) {
    const std::size_t num_classes = taxonomy.num_classes(l);
    // Candidate groups; a single group when NMS is class-agnostic.
    std::vector<std::vector<LevelDetection>> groups(
        config.class_agnostic_nms ? 1 : num_classes);
    for (std::size_t i = 0; i < image_dets.size(); ++i) {
      const auto& level_scores = scores[i][l - 1];
      for (std::size_t c = 0; c < num_classes; ++c) {
        if (level_scores[c] < config.score_floor) continue;
        groups[config.class_agnostic_nms ? 0 : c].push_back(
            {image_dets[i].bbox, c, level_scores[c], i});
      }
    }
    auto& kept = out[l - 1];
    for (const auto& group : groups) {
      std::vector<ScoredBox> boxes;
      boxes.reserve(group.size());
      for (const LevelDetection& d : group) boxes.push_back({d.bbox, d.score});
      for (std::size_t k : Nms(boxes, config.nms_iou)) kept.push_back(group[k]);
    }
    std::sort(kept.begin(), kept.end(),
              [](const LevelDetection& a, const LevelDetection& b) {
                if (a.score != b.score) return a.score > b.score;
                if (a.class_index != b.class_index) {
                  return a.class_index < b.class_index;
                }
                return a.source < b.source;
              });
    if (kept.size() > config.max_dets_per_image) {
      kept.resize(config.max_dets_per_image);
    }
  }
  return out;
}

std::vector<std::vector<LevelDetection>> MultiLevelNms(
    std::span<const DetBox> image_dets, const Taxonomy& taxonomy,
    AggregationMode mode, const EvalConfig& config) {
  config.Validate();
  return MultiLevelNms(image_dets, LevelAggregator(taxonomy, mode), config);
}

std::optional<double> AveragePrecision(
    const std::vector<bool>& is_true_positive, std::size_t num_gt) {
  if (num_gt == 0) {
    if (is_true_positive.empty()) return std::nullopt;
    return 0.0;
  }
  const std::size_t n = is_true_positive.size();
  std::vector<double> recall(n);
  std::vector<double> precision(n);
  std::size_t tp = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (is_true_positive[i]) ++tp;
    recall[i] = static_cast<double>(tp) / static_cast<double>(num_gt);
    precision[i] = static_cast<double>(tp) / static_cast<double>(i + 1);
  }
  // Interpolated precision: best precision at this recall or beyond.
  for (std::size_t i = n; i-- > 1;) {
    precision[i - 1] = std::max(precision[i - 1], precision[i]);
  }
  double sum = 0.0;
  for (int r = 0; r < kRecallPoints; ++r) {
    const double level = r / 100.0;
    auto it = std::lower_bound(recall.begin(), recall.end(), level);
    if (it == recall.end()) break;
    sum += precision[it - recall.begin()];
  }
  return sum / kRecallPoints;
}

LevelEvalReport MultiLevelMap(const DetectionSet& dets,
                              const GroundTruthSet& gts,
                              const Taxonomy& taxonomy, AggregationMode mode,
                              const EvalConfig& config) {
  config.Validate();
  if (gts.annotations.empty()) {
    throw Error(ErrorCode::kEmptyGroundTruth, "no ground-truth annotations");
  }
  const std::size_t leaves = taxonomy.num_leaves();
  std::set<std::string> universe(gts.image_ids.begin(), gts.image_ids.end());

  std::map<std::string, std::vector<GtBox>> gt_by_image;
  for (const GtBox& gt : gts.annotations) {
    if (gt.leaf_label >= leaves) {
      throw Error(ErrorCode::kDataMismatch,
                  "annotation label " + std::to_string(gt.leaf_label) +
                      " out of range for " + std::to_string(leaves) +
                      " leaves");
    }
    if (!ValidBox(gt.bbox)) {
      throw Error(ErrorCode::kDataFormat,
                  "degenerate ground-truth box in image " + gt.image_id);
    }
    universe.insert(gt.image_id);
    gt_by_image[gt.image_id].push_back(gt);
  }
  std::map<std::string, std::vector<DetBox>> det_by_image;
  for (const DetBox& det : dets) {
    if (!universe.contains(det.image_id)) {
      throw Error(ErrorCode::kDataMismatch,
                  "detection for unknown image '" + det.image_id + "'");
    }
    if (det.leaf_scores.size() != leaves) {
      throw Error(ErrorCode::kDataMismatch,
                  "detection with " + std::to_string(det.leaf_scores.size()) +
                      " scores, taxonomy has " + std::to_string(leaves) +
                      " leaves");
    }
    for (double s : det.leaf_scores) {
      if (!(s >= 0.0 && s <= 1.0)) {
        throw Error(ErrorCode::kInvalidProbability,
                    "detection score outside [0, 1] in image " + det.image_id);
      }
    }
    if (!ValidBox(det.bbox)) {
      throw Error(ErrorCode::kDataFormat,
                  "degenerate detection box in image " + det.image_id);
    }
    det_by_image[det.image_id].push_back(det);
  }
  // Canonical order makes the result independent of the input order.
  for (auto& [id, list] : det_by_image) {
    std::sort(list.begin(), list.end(), DetBefore);
  }
  for (auto& [id, list] : gt_by_image) {
    std::sort(list.begin(), list.end(), GtBefore);
  }

  const int depth = taxonomy.levels();
  const LevelAggregator aggregator(taxonomy, mode);
  std::map<std::string, std::vector<std::vector<LevelDetection>>> processed;
  for (const auto& [id, list] : det_by_image) {
    processed.emplace(id, MultiLevelNms(list, aggregator, config));
  }

  const std::size_t num_thresholds = config.iou_thresholds.size();
  LevelEvalReport report;
  report.per_level_map.resize(depth, 0.0);
  report.per_class_ap.resize(depth);
  for (int l = 1; l <= depth; ++l) {
    const std::size_t num_classes = taxonomy.num_classes(l);
    std::vector<std::size_t> num_gt(num_classes, 0);
    // records[c][t]: detections of class c with their match at threshold t.
    std::vector<std::vector<std::vector<Record>>> records(
        num_classes, std::vector<std::vector<Record>>(num_thresholds));

    for (const std::string& image : universe) {
      std::vector<std::vector<BBox>> gt_boxes(num_classes);
      if (auto it = gt_by_image.find(image); it != gt_by_image.end()) {
        for (const GtBox& gt : it->second) {
          gt_boxes[taxonomy.map_leaf_to_level(gt.leaf_label, l)].push_back(
              gt.bbox);
        }
      }
      std::vector<std::vector<const LevelDetection*>> det_of_class(num_classes);
      auto pit = processed.find(image);
      if (pit != processed.end()) {
        for (const LevelDetection& d : pit->second[l - 1]) {
          det_of_class[d.class_index].push_back(&d);
        }
      }
      const std::string& image_key = *universe.find(image);
      for (std::size_t c = 0; c < num_classes; ++c) {
        num_gt[c] += gt_boxes[c].size();
        if (det_of_class[c].empty()) continue;
        std::vector<BBox> det_boxes;
        for (const LevelDetection* d : det_of_class[c]) {
          det_boxes.push_back(d->bbox);
        }
        for (std::size_t t = 0; t < num_thresholds; ++t) {
          const auto tp = MatchDetections(det_boxes, gt_boxes[c],
                                          config.iou_thresholds[t]);
          for (std::size_t d = 0; d < det_boxes.size(); ++d) {
            records[c][t].push_back(
                {det_of_class[c][d]->score, &image_key, det_boxes[d], tp[d]});
          }
        }
      }
    }

    double map_sum = 0.0;
    std::size_t map_count = 0;
    for (std::size_t c = 0; c < num_classes; ++c) {
      if (num_gt[c] == 0) continue;
      double ap_sum = 0.0;
      for (std::size_t t = 0; t < num_thresholds; ++t) {
        auto& list = records[c][t];
        std::sort(list.begin(), list.end(), RecordBefore);
        std::vector<bool> flags;
        flags.reserve(list.size());
        for (const Record& r : list) flags.push_back(r.true_positive);
        ap_sum += *AveragePrecision(flags, num_gt[c]);
      }
      const double ap = ap_sum / static_cast<double>(num_thresholds);
      report.per_class_ap[l - 1][c] = ap;
      map_sum += ap;
      ++map_count;
    }
    report.per_level_map[l - 1] = map_sum / static_cast<double>(map_count);
  }
  return report;
}

}  // namespace hierloss
