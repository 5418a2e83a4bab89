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

#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>
#include <tuple>
#include <utility>

#include "hierloss/error.h"
#include "json.hpp"

namespace hierloss {

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

json ParseJson(std::string_view document, ErrorCode code, const char* what) {
  json doc = json::parse(document, nullptr, /*allow_exceptions=*/false);
  if (doc.is_discarded()) {
    throw Error(code, std::string(what) + " is not valid JSON");
  }
  return doc;
}

[[noreturn]] void BadData(const std::string& message) {
  throw Error(ErrorCode::kDataFormat, message);
}

[[noreturn]] void BadConfig(const std::string& message) {
  throw Error(ErrorCode::kConfig, message);
}

std::string IdOf(const json& value, const char* what) {
  if (value.is_string()) return value.get<std::string>();
  if (value.is_number_integer()) return std::to_string(value.get<long long>());
  BadData(std::string(what) + " must be a string or integer");
}

double NumberOf(const json& value, const char* what) {
  if (!value.is_number()) BadData(std::string(what) + " must be a number");
  return value.get<double>();
}

const json& Field(const json& object, const char* key, const char* what) {
  if (!object.is_object() || !object.contains(key)) {
    BadData(std::string(what) + " needs \"" + key + "\"");
  }
  return object[key];
}

BBox BoxOf(const json& value) {
  if (!value.is_array() || value.size() != 4) {
    BadData("bbox must be [x, y, width, height]");
  }
  return {NumberOf(value[0], "bbox"), NumberOf(value[1], "bbox"),
          NumberOf(value[2], "bbox"), NumberOf(value[3], "bbox")};
}

// Leaf index from an integer index or a leaf id.
std::size_t LeafOf(const json& value, const Taxonomy& taxonomy) {
  if (value.is_number_integer()) {
    const long long index = value.get<long long>();
    if (index < 0 || static_cast<std::size_t>(index) >= taxonomy.num_leaves()) {
      throw Error(ErrorCode::kDataMismatch,
                  "leaf index " + std::to_string(index) + " out of range");
    }
    return static_cast<std::size_t>(index);
  }
  if (value.is_string()) {
    const auto ref = taxonomy.Find(value.get<std::string>());
    if (!ref || ref->level != 1) {
      throw Error(ErrorCode::kDataMismatch,
                  "unknown leaf '" + value.get<std::string>() + "'");
    }
    return ref->index;
  }
  BadData("leaf label must be an index or a leaf id");
}

std::vector<double> NumberList(const json& value, const char* what) {
  if (!value.is_array()) BadData(std::string(what) + " must be a list");
  std::vector<double> out;
  out.reserve(value.size());
  for (const json& v : value) out.push_back(NumberOf(v, what));
  return out;
}

template <typename T>
T ConfigValue(const json& object, const char* key, T fallback) {
  if (!object.contains(key)) return fallback;
  try {
    return object[key].get<T>();
  } catch (const json::exception&) {
    BadConfig(std::string("bad value for \"") + key + "\"");
  }
}

AggregationMode ModeOf(const json& value) {
  if (!value.is_string()) BadConfig("mode must be \"sum\" or \"union\"");
  const auto mode = ParseAggregationMode(value.get<std::string>());
  if (!mode) BadConfig("unknown mode '" + value.get<std::string>() + "'");
  return *mode;
}

LossConfig LossConfigOf(const json& block) {
  if (!block.is_object()) BadConfig("loss block must be an object");
  LossConfig cfg;
  if (block.contains("mode")) cfg.mode = ModeOf(block["mode"]);
  const std::string base = ConfigValue<std::string>(block, "base", "ce");
  if (base == "ce" || base == "cross_entropy") {
    cfg.base = BaseLoss::CrossEntropy();
  } else if (base == "focal") {
    cfg.base = BaseLoss::Focal();
  } else {
    BadConfig("unknown base loss '" + base + "'");
  }
  if (block.contains("focal")) {
    const json& focal = block["focal"];
    if (!focal.is_object()) BadConfig("focal block must be an object");
    cfg.base.focal.gamma = ConfigValue<double>(focal, "gamma", 2.0);
    cfg.base.focal.alpha_balance =
        ConfigValue<double>(focal, "alpha_balance", 0.25);
  }
  int sources = 0;
  if (block.contains("weights")) {
    cfg.weights = LevelWeights{ConfigValue<std::vector<double>>(
        block, "weights", {})};
    ++sources;
  }
  if (block.contains("scheme")) {
    const std::string name = ConfigValue<std::string>(block, "scheme", "");
    cfg.scheme = ParseWeightScheme(name);
    if (!cfg.scheme) BadConfig("unknown weight scheme '" + name + "'");
    ++sources;
  }
  if (block.contains("exp_alpha")) {
    cfg.exp_alpha = ConfigValue<double>(block, "exp_alpha", 0.0);
    ++sources;
  }
  if (sources > 1) {
    BadConfig("give only one of weights, scheme, exp_alpha");
  }
  return cfg;
}

}  // namespace

std::string ReadTextFile(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  if (in.bad()) throw Error(ErrorCode::kIo, "failed reading " + path.string());
  return buffer.str();
}

void WriteTextFile(const std::filesystem::path& path, std::string_view text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
  out << text;
  if (!out) throw Error(ErrorCode::kIo, "failed writing " + path.string());
}

GroundTruthSet ParseGroundTruth(std::string_view document,
                                const Taxonomy& taxonomy) {
  const json doc = ParseJson(document, ErrorCode::kDataFormat, "ground truth");
  if (!doc.is_object()) BadData("ground truth must be an object");
  GroundTruthSet out;
  if (doc.contains("images")) {
    if (!doc["images"].is_array()) BadData("\"images\" must be a list");
    for (const json& image : doc["images"]) {
      out.image_ids.push_back(IdOf(Field(image, "id", "image"), "image id"));
    }
  }
  const json& annotations = Field(doc, "annotations", "ground truth");
  if (!annotations.is_array()) BadData("\"annotations\" must be a list");
  for (const json& a : annotations) {
    out.annotations.push_back(
        {IdOf(Field(a, "image_id", "annotation"), "image_id"),
         BoxOf(Field(a, "bbox", "annotation")),
         LeafOf(Field(a, "leaf_label", "annotation"), taxonomy)});
  }
  return out;
}

DetectionSet ParseDetections(std::string_view document,
                             const Taxonomy& taxonomy) {
  const json doc = ParseJson(document, ErrorCode::kDataFormat, "detections");
  const json& list =
      doc.is_object() && doc.contains("detections") ? doc["detections"] : doc;
  if (!list.is_array()) BadData("detections must be a list");
  DetectionSet out;
  // Sparse entries keyed by (image, box) -> position in `out`.
  std::map<std::tuple<std::string, double, double, double, double>,
           std::size_t>
      sparse;
  for (const json& d : list) {
    const std::string image = IdOf(Field(d, "image_id", "detection"),
                                   "image_id");
    const BBox box = BoxOf(Field(d, "bbox", "detection"));
    if (d.contains("leaf_scores")) {
      std::vector<double> scores = NumberList(d["leaf_scores"], "leaf_scores");
      if (scores.size() != taxonomy.num_leaves()) {
        throw Error(ErrorCode::kDataMismatch,
                    "detection has " + std::to_string(scores.size()) +
                        " leaf scores, taxonomy has " +
                        std::to_string(taxonomy.num_leaves()) + " leaves");
      }
      out.push_back({image, box, std::move(scores)});
      continue;
    }
    const std::size_t leaf = LeafOf(Field(d, "leaf_label", "detection"),
                                    taxonomy);
    const double score = NumberOf(Field(d, "score", "detection"), "score");
    auto key = std::make_tuple(image, box.x, box.y, box.width, box.height);
    auto [it, inserted] = sparse.emplace(key, out.size());
    if (inserted) {
      out.push_back(
          {image, box, std::vector<double>(taxonomy.num_leaves(), 0.0)});
    }
    double& slot = out[it->second].leaf_scores[leaf];
    slot = std::max(slot, score);
  }
  return out;
}

std::vector<ClsPrediction> ParsePredictions(std::string_view document,
                                            const Taxonomy& taxonomy) {
  const json doc = ParseJson(document, ErrorCode::kDataFormat, "predictions");
  const json& list =
      doc.is_object() && doc.contains("predictions") ? doc["predictions"] : doc;
  if (!list.is_array()) BadData("predictions must be a list");
  std::vector<ClsPrediction> out;
  for (const json& p : list) {
    ClsPrediction pred;
    pred.sample_id = p.contains("sample_id")
                         ? IdOf(p["sample_id"], "sample_id")
                         : std::to_string(out.size());
    pred.true_leaf = LeafOf(Field(p, "true_leaf", "prediction"), taxonomy);
    if (p.contains("leaf_scores")) {
      pred.leaf_scores = NumberList(p["leaf_scores"], "leaf_scores");
    } else if (p.contains("top_k")) {
      pred.leaf_scores.assign(taxonomy.num_leaves(),
                              std::numeric_limits<double>::lowest());
      if (!p["top_k"].is_array()) BadData("top_k must be a list");
      for (const json& entry : p["top_k"]) {
        if (!entry.is_array() || entry.size() != 2) {
          BadData("top_k entries must be [leaf, score]");
        }
        pred.leaf_scores[LeafOf(entry[0], taxonomy)] =
            NumberOf(entry[1], "score");
      }
    } else {
      BadData("prediction needs leaf_scores or top_k");
    }
    out.push_back(std::move(pred));
  }
  ValidatePredictions(out, taxonomy);
  return out;
}

std::vector<std::vector<double>> ParseProbabilityBatch(
    std::string_view document) {
  const json doc = ParseJson(document, ErrorCode::kDataFormat, "probabilities");
  const json& list =
      doc.is_object() && doc.contains("probs") ? doc["probs"] : doc;
  if (!list.is_array() || list.empty()) {
    BadData("probabilities must be a non-empty list");
  }
  std::vector<std::vector<double>> out;
  if (list[0].is_number()) {
    out.push_back(NumberList(list, "probabilities"));
    return out;
  }
  for (const json& row : list) out.push_back(NumberList(row, "probabilities"));
  return out;
}

LevelWeights LossConfig::ResolveWeights(int depth) const {
  if (weights) return *weights;
  if (scheme) return NamedWeightScheme(*scheme, depth);
  if (exp_alpha) return ExpLevelWeights(*exp_alpha, depth);
  return LevelWeights{std::vector<double>(depth, 1.0)};
}

LossConfig ParseLossConfig(std::string_view document) {
  return LossConfigOf(ParseJson(document, ErrorCode::kConfig, "loss config"));
}

RunConfig ParseRunConfig(std::string_view document) {
  const json doc = ParseJson(document, ErrorCode::kConfig, "config");
  if (!doc.is_object()) BadConfig("config must be an object");
  RunConfig cfg;
  if (doc.contains("taxonomy")) {
    cfg.taxonomy_path = ConfigValue<std::string>(doc, "taxonomy", "");
  }
  if (doc.contains("output")) {
    cfg.output_path = ConfigValue<std::string>(doc, "output", "");
  }
  cfg.seed = ConfigValue<std::uint64_t>(doc, "seed", 0);
  if (doc.contains("loss")) cfg.loss = LossConfigOf(doc["loss"]);

  if (doc.contains("eval")) {
    const json& e = doc["eval"];
    if (!e.is_object()) BadConfig("eval block must be an object");
    cfg.eval.iou_thresholds = ConfigValue<std::vector<double>>(
        e, "iou_thresholds", cfg.eval.iou_thresholds);
    cfg.eval.nms_iou = ConfigValue<double>(e, "nms_iou", cfg.eval.nms_iou);
    cfg.eval.score_floor =
        ConfigValue<double>(e, "score_floor", cfg.eval.score_floor);
    cfg.eval.max_dets_per_image = ConfigValue<std::size_t>(
        e, "max_dets_per_image", cfg.eval.max_dets_per_image);
    cfg.eval.class_agnostic_nms = ConfigValue<bool>(
        e, "class_agnostic_nms", cfg.eval.class_agnostic_nms);
    if (e.contains("mode")) cfg.eval_mode = ModeOf(e["mode"]);
    cfg.eval.Validate();
  }

  if (doc.contains("train")) {
    const json& t = doc["train"];
    if (!t.is_object()) BadConfig("train block must be an object");
    const std::string loss = ConfigValue<std::string>(t, "loss", "hierarchical");
    if (loss == "plain") {
      cfg.train.loss = DemoLoss::kPlain;
    } else if (loss == "hierarchical") {
      cfg.train.loss = DemoLoss::kHierarchical;
    } else {
      BadConfig("train.loss must be \"plain\" or \"hierarchical\"");
    }
    cfg.train.steps = ConfigValue<int>(t, "steps", cfg.train.steps);
    cfg.train.step_size = ConfigValue<double>(t, "step_size", cfg.train.step_size);
    if (t.contains("dataset")) {
      const json& d = t["dataset"];
      if (!d.is_object()) BadConfig("train.dataset must be an object");
      auto& ds = cfg.train.dataset;
      if (d.contains("centers")) {
        for (const auto& c :
             ConfigValue<std::vector<std::vector<double>>>(d, "centers", {})) {
          if (c.size() != 2) BadConfig("cluster centers must be [x, y]");
          ds.centers.push_back({c[0], c[1]});
        }
      }
      ds.stddev = ConfigValue<double>(d, "stddev", ds.stddev);
      ds.train_per_class =
          ConfigValue<std::size_t>(d, "train_per_class", ds.train_per_class);
      ds.test_per_class =
          ConfigValue<std::size_t>(d, "test_per_class", ds.test_per_class);
    }
  }
  return cfg;
}

std::string ReportToJson(const LevelEvalReport& report,
                         const Taxonomy& taxonomy, AggregationMode mode,
                         const EvalConfig& config) {
  ordered_json out;
  out["mode"] = std::string(AggregationModeName(mode));
  out["per_level_map"] = report.per_level_map;
  ordered_json per_class = ordered_json::array();
  for (std::size_t l = 0; l < report.per_class_ap.size(); ++l) {
    ordered_json level = ordered_json::array();
    for (const auto& [cls, ap] : report.per_class_ap[l]) {
      level.push_back({{"class_index", cls},
                       {"id", taxonomy.node(static_cast<int>(l) + 1, cls).id},
                       {"ap", ap}});
    }
    per_class.push_back(std::move(level));
  }
  out["per_class_ap"] = std::move(per_class);
  out["config"] = {{"iou_thresholds", config.iou_thresholds},
                   {"nms_iou", config.nms_iou},
                   {"score_floor", config.score_floor},
                   {"max_dets_per_image", config.max_dets_per_image},
                   {"class_agnostic_nms", config.class_agnostic_nms}};
  return out.dump(2) + "\n";
}

}  // namespace hierloss
