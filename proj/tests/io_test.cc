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
#include "hierloss/io.h"

#include <filesystem>
#include <functional>
#include <limits>
#include <string>

#include <gtest/gtest.h>

#include "hierloss/error.h"
#include "json.hpp"
#include "test_util.h"

namespace hierloss {
namespace {

using testing::DataPath;
using testing::SevenNode;

ErrorCode CodeOf(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error thrown";
  return ErrorCode::kIo;
}

TEST(FileIoTest, ReadsAndReportsMissingFiles) {
  EXPECT_NE(ReadTextFile(DataPath("seven_node.json")).find("vehicle"),
            std::string::npos);
  EXPECT_EQ(CodeOf([] { ReadTextFile(DataPath("does_not_exist.json")); }),
            ErrorCode::kIo);
  const auto path =
      std::filesystem::temp_directory_path() / "hierloss_io_test.txt";
  WriteTextFile(path, "abc\n");
  EXPECT_EQ(ReadTextFile(path), "abc\n");
  std::filesystem::remove(path);
}

TEST(TaxonomyFileTest, FixtureMatchesInlineTree) {
  const Taxonomy loaded = LoadTaxonomy(DataPath("seven_node.json"));
  const Taxonomy inline_tree = SevenNode();
  EXPECT_EQ(loaded.class_counts(), inline_tree.class_counts());
  for (std::size_t k = 0; k < 4; ++k) {
    EXPECT_EQ(loaded.node(1, k).id, inline_tree.node(1, k).id);
    EXPECT_EQ(loaded.parent_index(1, k), inline_tree.parent_index(1, k));
  }
}

TEST(GroundTruthTest, ParsesIndicesAndIds) {
  const Taxonomy t = SevenNode();
  const GroundTruthSet gt = ParseGroundTruth(R"({
    "images": [{"id": "x", "width": 64, "height": 48}, {"id": 7}],
    "annotations": [
      {"image_id": "x", "bbox": [1, 2, 3, 4], "leaf_label": 2},
      {"image_id": 7, "bbox": [0, 0, 5, 5], "leaf_label": "d"}
    ]})",
                                             t);
  EXPECT_EQ(gt.image_ids, (std::vector<std::string>{"x", "7"}));
  ASSERT_EQ(gt.annotations.size(), 2u);
  EXPECT_EQ(gt.annotations[0].bbox, (BBox{1, 2, 3, 4}));
  EXPECT_EQ(gt.annotations[0].leaf_label, 2u);
  EXPECT_EQ(gt.annotations[1].image_id, "7");
  EXPECT_EQ(gt.annotations[1].leaf_label, 3u);
}

TEST(GroundTruthTest, Errors) {
  const Taxonomy t = SevenNode();
  EXPECT_EQ(CodeOf([&] { ParseGroundTruth("{", t); }), ErrorCode::kDataFormat);
  EXPECT_EQ(CodeOf([&] { ParseGroundTruth(R"({"images": []})", t); }),
            ErrorCode::kDataFormat);
  EXPECT_EQ(CodeOf([&] {
              ParseGroundTruth(R"({"annotations": [{"image_id": "x",
                "bbox": [1, 2, 3], "leaf_label": 0}]})",
                               t);
            }),
            ErrorCode::kDataFormat);
  EXPECT_EQ(CodeOf([&] {
              ParseGroundTruth(R"({"annotations": [{"image_id": "x",
                "bbox": [1, 2, 3, 4], "leaf_label": 4}]})",
                               t);
            }),
            ErrorCode::kDataMismatch);
  EXPECT_EQ(CodeOf([&] {
              ParseGroundTruth(R"({"annotations": [{"image_id": "x",
                "bbox": [1, 2, 3, 4], "leaf_label": "m0"}]})",
                               t);
            }),
            ErrorCode::kDataMismatch);
}

TEST(DetectionsTest, DenseAndSparse) {
  const Taxonomy t = SevenNode();
  const DetectionSet dense = ParseDetections(
      R"([{"image_id": "x", "bbox": [0, 0, 2, 2],
           "leaf_scores": [0.1, 0.2, 0.3, 0.4]}])",
      t);
  ASSERT_EQ(dense.size(), 1u);
  EXPECT_EQ(dense[0].leaf_scores, (std::vector<double>{0.1, 0.2, 0.3, 0.4}));

  const DetectionSet sparse = ParseDetections(R"({"detections": [
      {"image_id": "x", "bbox": [0, 0, 2, 2], "leaf_label": "b", "score": 0.5},
      {"image_id": "x", "bbox": [0, 0, 2, 2], "leaf_label": 3, "score": 0.2},
      {"image_id": "x", "bbox": [0, 0, 2, 2], "leaf_label": 1, "score": 0.4},
      {"image_id": "y", "bbox": [0, 0, 2, 2], "leaf_label": 0, "score": 0.9}
    ]})",
                                              t);
  ASSERT_EQ(sparse.size(), 2u);
  EXPECT_EQ(sparse[0].leaf_scores, (std::vector<double>{0, 0.5, 0, 0.2}));
  EXPECT_EQ(sparse[1].image_id, "y");
  EXPECT_EQ(sparse[1].leaf_scores, (std::vector<double>{0.9, 0, 0, 0}));
}

TEST(DetectionsTest, Errors) {
  const Taxonomy t = SevenNode();
  EXPECT_EQ(CodeOf([&] {
              ParseDetections(R"([{"image_id": "x", "bbox": [0, 0, 2, 2],
                                   "leaf_scores": [0.1, 0.2]}])",
                              t);
            }),
            ErrorCode::kDataMismatch);
  EXPECT_EQ(CodeOf([&] { ParseDetections(R"({"x": 1})", t); }),
            ErrorCode::kDataFormat);
  EXPECT_EQ(CodeOf([&] {
              ParseDetections(R"([{"image_id": "x", "bbox": [0, 0, 2, 2]}])",
                              t);
            }),
            ErrorCode::kDataFormat);
}

TEST(PredictionsTest, DenseAndTopK) {
  const Taxonomy t = SevenNode();
  const auto preds = ParsePredictions(R"([
      {"sample_id": "s0", "true_leaf": "a", "leaf_scores": [0.7, 0.1, 0.1, 0.1]},
      {"sample_id": 1, "true_leaf": 2, "top_k": [["d", 0.6], [2, 0.3]]}
    ])",
                                      t);
  ASSERT_EQ(preds.size(), 2u);
  EXPECT_EQ(preds[0].true_leaf, 0u);
  EXPECT_EQ(preds[1].sample_id, "1");
  EXPECT_EQ(preds[1].leaf_scores[3], 0.6);
  EXPECT_EQ(preds[1].leaf_scores[2], 0.3);
  EXPECT_EQ(preds[1].leaf_scores[0], std::numeric_limits<double>::lowest());
  EXPECT_EQ(CodeOf([&] {
              ParsePredictions(R"([{"true_leaf": 0, "leaf_scores": [1, 0]}])",
                               t);
            }),
            ErrorCode::kDataMismatch);
  EXPECT_EQ(CodeOf([&] { ParsePredictions(R"([{"true_leaf": 0}])", t); }),
            ErrorCode::kDataFormat);
}

TEST(ProbabilityBatchTest, Shapes) {
  EXPECT_EQ(ParseProbabilityBatch("[0.5, 0.5]"),
            (std::vector<std::vector<double>>{{0.5, 0.5}}));
  EXPECT_EQ(ParseProbabilityBatch("[[1, 0], [0, 1]]").size(), 2u);
  EXPECT_EQ(ParseProbabilityBatch(R"({"probs": [[0.2, 0.8]]})")[0][1], 0.8);
  EXPECT_EQ(CodeOf([] { ParseProbabilityBatch("[]"); }),
            ErrorCode::kDataFormat);
  EXPECT_EQ(CodeOf([] { ParseProbabilityBatch(R"(["a"])"); }),
            ErrorCode::kDataFormat);
}

TEST(LossConfigTest, WeightSources) {
  const LossConfig explicit_w = ParseLossConfig(
      R"({"mode": "union", "base": "focal", "weights": [0.5, 0.3, 0.2],
          "focal": {"gamma": 1.5, "alpha_balance": 0.4}})");
  EXPECT_EQ(explicit_w.mode, AggregationMode::kUnion);
  EXPECT_EQ(explicit_w.base.kind, BaseLossKind::kFocal);
  EXPECT_EQ(explicit_w.base.focal.gamma, 1.5);
  EXPECT_EQ(explicit_w.base.focal.alpha_balance, 0.4);
  EXPECT_EQ(explicit_w.ResolveWeights(3).values,
            (std::vector<double>{0.5, 0.3, 0.2}));

  EXPECT_EQ(ParseLossConfig(R"({"scheme": "leaf_focused_det"})")
                .ResolveWeights(3)
                .values,
            (std::vector<double>{0.8, 0.1, 0.1}));
  EXPECT_EQ(ParseLossConfig(R"({"exp_alpha": 0.5})").ResolveWeights(3).values,
            ExpLevelWeights(0.5, 3).values);
  EXPECT_EQ(ParseLossConfig("{}").ResolveWeights(2).values,
            (std::vector<double>{1.0, 1.0}));
  EXPECT_EQ(ParseLossConfig("{}").base.kind, BaseLossKind::kCrossEntropy);
}

TEST(LossConfigTest, Errors) {
  for (const char* doc :
       {R"({"weights": [1, 0], "scheme": "leaf_focused_cls"})",
        R"({"scheme": "nope"})", R"({"mode": "max"})", R"({"base": "hinge"})",
        R"({"weights": "heavy"})", R"([1])", R"({)"}) {
    EXPECT_EQ(CodeOf([&] { ParseLossConfig(doc); }), ErrorCode::kConfig)
        << doc;
  }
}

TEST(RunConfigTest, FullDocument) {
  const RunConfig cfg = ParseRunConfig(R"({
    "taxonomy": "tree.json", "output": "out.json", "seed": 42,
    "loss": {"mode": "sum", "scheme": "hier_focused_cls"},
    "eval": {"iou_thresholds": [0.5, 0.75], "nms_iou": 0.6,
             "score_floor": 0.1, "max_dets_per_image": 10,
             "class_agnostic_nms": true, "mode": "sum"},
    "train": {"loss": "plain", "steps": 12, "step_size": 0.25,
              "dataset": {"centers": [[0, 0], [1, 1]], "stddev": 0.5,
                          "train_per_class": 3, "test_per_class": 4}}
  })");
  EXPECT_EQ(cfg.taxonomy_path, "tree.json");
  EXPECT_EQ(cfg.output_path, "out.json");
  EXPECT_EQ(cfg.seed, 42u);
  EXPECT_EQ(cfg.loss.scheme, WeightScheme::kHierFocusedCls);
  EXPECT_EQ(cfg.eval.iou_thresholds, (std::vector<double>{0.5, 0.75}));
  EXPECT_EQ(cfg.eval.nms_iou, 0.6);
  EXPECT_EQ(cfg.eval.score_floor, 0.1);
  EXPECT_EQ(cfg.eval.max_dets_per_image, 10u);
  EXPECT_TRUE(cfg.eval.class_agnostic_nms);
  EXPECT_EQ(cfg.eval_mode, AggregationMode::kSum);
  EXPECT_EQ(cfg.train.loss, DemoLoss::kPlain);
  EXPECT_EQ(cfg.train.steps, 12);
  EXPECT_EQ(cfg.train.step_size, 0.25);
  ASSERT_EQ(cfg.train.dataset.centers.size(), 2u);
  EXPECT_EQ(cfg.train.dataset.centers[1], (Point2{1, 1}));
  EXPECT_EQ(cfg.train.dataset.stddev, 0.5);
  EXPECT_EQ(cfg.train.dataset.test_per_class, 4u);
}

TEST(RunConfigTest, DefaultsAndErrors) {
  const RunConfig cfg = ParseRunConfig("{}");
  EXPECT_EQ(cfg.seed, 0u);
  EXPECT_FALSE(cfg.taxonomy_path.has_value());
  EXPECT_EQ(cfg.eval_mode, AggregationMode::kUnion);
  EXPECT_EQ(cfg.eval.iou_thresholds.size(), 10u);
  for (const char* doc :
       {R"({"eval": {"iou_thresholds": [0.9, 0.5]}})",
        R"({"eval": {"nms_iou": 1.5}})", R"({"train": {"loss": "other"}})",
        R"({"train": {"dataset": {"centers": [[1, 2, 3]]}}})",
        R"({"seed": "zero"})", R"([])"}) {
    EXPECT_EQ(CodeOf([&] { ParseRunConfig(doc); }), ErrorCode::kConfig)
        << doc;
  }
}

TEST(ReportTest, JsonLayout) {
  const Taxonomy t = SevenNode();
  LevelEvalReport report;
  report.per_level_map = {0.5, 0.75, 1.0};
  report.per_class_ap = {{{0, 0.5}}, {{1, 0.75}}, {{0, 1.0}}};
  const auto doc = nlohmann::json::parse(
      ReportToJson(report, t, AggregationMode::kUnion, EvalConfig{}));
  EXPECT_EQ(doc["mode"], "union");
  EXPECT_EQ(doc["per_level_map"][1], 0.75);
  EXPECT_EQ(doc["per_class_ap"][1][0]["id"], "m1");
  EXPECT_EQ(doc["per_class_ap"][0][0]["ap"], 0.5);
  EXPECT_EQ(doc["config"]["max_dets_per_image"], 100);
  EXPECT_EQ(doc["config"]["iou_thresholds"].size(), 10u);
}

}  // namespace
}  // namespace hierloss
