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
// hierloss: taxonomy validation, aggregation, hierarchical losses, gradient
// checks, detection/classification evaluation and the training demo.
//
// Exit codes: 0 success, 1 I/O, 2 taxonomy validation, 3 argument/domain,
// 4 config, 5 data/taxonomy mismatch, 6 gradient check above tolerance.
#include <cstdio>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "hierloss/aggregation.h"
#include "hierloss/cls_eval.h"
#include "hierloss/det_eval.h"
#include "hierloss/error.h"
#include "hierloss/gradcheck.h"
#include "hierloss/io.h"
#include "hierloss/losses.h"
#include "hierloss/taxonomy.h"
#include "hierloss/train_demo.h"

namespace hierloss {
namespace {

constexpr int kExitOk = 0;
constexpr int kExitIo = 1;
constexpr int kExitTaxonomy = 2;
constexpr int kExitDomain = 3;
constexpr int kExitConfig = 4;
constexpr int kExitData = 5;
constexpr int kExitCheckFailed = 6;

int ExitCodeFor(ErrorCode code) {
  switch (code) {
    case ErrorCode::kIo:
      return kExitIo;
    case ErrorCode::kParse:
    case ErrorCode::kValidation:
      return kExitTaxonomy;
    case ErrorCode::kConfig:
    case ErrorCode::kWeightLengthMismatch:
    case ErrorCode::kNonPositiveAlpha:
    case ErrorCode::kSchemeDepthMismatch:
      return kExitConfig;
    case ErrorCode::kDataMismatch:
    case ErrorCode::kDataFormat:
    case ErrorCode::kEmptyGroundTruth:
      return kExitData;
    default:
      return kExitDomain;
  }
}

std::string Fmt(const char* format, double value) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), format, value);
  return buf;
}

// Adding 0.0 turns -0 into 0.
std::string G12(double value) { return Fmt("%.12g", value + 0.0); }

struct GlobalOptions {
  std::string taxonomy_path;
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out_path;
};

// Flag overrides for the loss block of the config file.
struct LossFlags {
  std::string mode;
  std::string base;
  std::vector<double> weights;
  std::string scheme;
  std::optional<double> exp_alpha;
  std::optional<double> gamma;
  std::optional<double> alpha_balance;
};

void AddLossFlags(CLI::App* cmd, LossFlags& flags) {
  cmd->add_option("--mode", flags.mode, "sum or union");
  cmd->add_option("--base", flags.base, "ce or focal");
  cmd->add_option("--weights", flags.weights, "per-level weights, leaf first")
      ->delimiter(',');
  cmd->add_option("--scheme", flags.scheme,
                  "leaf_focused_det, leaf_focused_cls or hier_focused_cls");
  cmd->add_option("--exp-alpha", flags.exp_alpha,
                  "exp-decay level weights exp(-alpha (l-1))");
  cmd->add_option("--gamma", flags.gamma, "focal gamma");
  cmd->add_option("--alpha-balance", flags.alpha_balance,
                  "focal alpha balance");
}

class Runner {
 public:
  explicit Runner(GlobalOptions options) : options_(std::move(options)) {}

  RunConfig& config() {
    if (!config_) {
      config_ = options_.config_path.empty()
                    ? RunConfig{}
                    : ParseRunConfig(ReadTextFile(options_.config_path));
      if (options_.seed) config_->seed = *options_.seed;
    }
    return *config_;
  }

  const Taxonomy& taxonomy() {
    if (!taxonomy_) {
      std::string path = options_.taxonomy_path;
      if (path.empty() && config().taxonomy_path) path = *config().taxonomy_path;
      if (path.empty()) {
        throw Error(ErrorCode::kConfig, "no taxonomy given (--taxonomy)");
      }
      taxonomy_ = LoadTaxonomy(path);
    }
    return *taxonomy_;
  }

  std::string OutPath() {
    if (!options_.out_path.empty()) return options_.out_path;
    return config().output_path.value_or("");
  }

  LossConfig ResolveLoss(const LossFlags& flags) {
    LossConfig loss = config().loss;
    if (!flags.mode.empty()) {
      auto mode = ParseAggregationMode(flags.mode);
      if (!mode) throw Error(ErrorCode::kConfig, "unknown mode " + flags.mode);
      loss.mode = *mode;
    }
    if (!flags.base.empty()) {
      if (flags.base == "ce") {
        loss.base.kind = BaseLossKind::kCrossEntropy;
      } else if (flags.base == "focal") {
        loss.base.kind = BaseLossKind::kFocal;
      } else {
        throw Error(ErrorCode::kConfig, "unknown base loss " + flags.base);
      }
    }
    if (flags.gamma) loss.base.focal.gamma = *flags.gamma;
    if (flags.alpha_balance) loss.base.focal.alpha_balance = *flags.alpha_balance;
    const int given = !flags.weights.empty() + !flags.scheme.empty() +
                      flags.exp_alpha.has_value();
    if (given > 1) {
      throw Error(ErrorCode::kConfig,
                  "give only one of --weights, --scheme, --exp-alpha");
    }
    if (given == 1) {
      loss.weights.reset();
      loss.scheme.reset();
      loss.exp_alpha.reset();
    }
    if (!flags.weights.empty()) loss.weights = LevelWeights{flags.weights};
    if (!flags.scheme.empty()) {
      loss.scheme = ParseWeightScheme(flags.scheme);
      if (!loss.scheme) {
        throw Error(ErrorCode::kConfig, "unknown scheme " + flags.scheme);
      }
    }
    if (flags.exp_alpha) loss.exp_alpha = flags.exp_alpha;
    return loss;
  }

  void Emit(const std::string& text) {
    const std::string path = OutPath();
    if (path.empty()) {
      std::cout << text;
    } else {
      WriteTextFile(path, text);
    }
  }

 private:
  GlobalOptions options_;
  std::optional<RunConfig> config_;
  std::optional<Taxonomy> taxonomy_;
};

int CmdValidate(Runner& run) {
  const Taxonomy& t = run.taxonomy();
  const auto counts = t.class_counts();
  std::size_t nodes = 0;
  std::ostringstream classes;
  for (std::size_t i = 0; i < counts.size(); ++i) {
    nodes += counts[i];
    classes << (i ? "," : "") << counts[i];
  }
  std::cout << "nodes: " << nodes << "\n";
  std::cout << "levels: " << t.levels() << ", classes: [" << classes.str()
            << "]\n";
  if (t.is_flat()) std::cout << "flat label set (no parent levels)\n";
  for (int l = 1; l < t.levels(); ++l) {
    const LevelMatrix m = t.transition_matrix(l);
    std::cout << "transition " << l << "->" << l + 1 << ": " << m.rows()
              << "x" << m.cols() << "\n";
  }
  std::cout << "max children per parent: " << t.max_children() << "\n";
  return kExitOk;
}

int CmdAggregate(Runner& run, const std::string& probs_path,
                 const std::string& mode_name, int level) {
  const Taxonomy& t = run.taxonomy();
  const auto mode = ParseAggregationMode(mode_name);
  if (!mode) throw Error(ErrorCode::kConfig, "unknown mode " + mode_name);
  if (level < 1 || level > t.levels()) {
    throw Error(ErrorCode::kLevelOutOfRange,
                "level " + std::to_string(level) + " outside [1, " +
                    std::to_string(t.levels()) + "]");
  }
  const auto batch = ParseProbabilityBatch(ReadTextFile(probs_path));
  std::ostringstream out;
  for (const auto& row : batch) {
    if (row.size() != t.num_leaves()) {
      throw Error(ErrorCode::kDataMismatch,
                  "probability vector of length " + std::to_string(row.size()) +
                      " for " + std::to_string(t.num_leaves()) + " leaves");
    }
    ProbVector p{1, row, *mode == AggregationMode::kSum};
    ValidateProbVector(p);
    while (p.level < level) {
      p = *mode == AggregationMode::kSum ? SumAggregate(p, t)
                                          : UnionAggregate(p, t);
    }
    for (std::size_t i = 0; i < p.values.size(); ++i) {
      out << (i ? " " : "") << G12(p.values[i]);
    }
    out << "\n";
  }
  run.Emit(out.str());
  return kExitOk;
}

std::size_t ResolveLeaf(const Taxonomy& t, const std::string& label) {
  if (auto ref = t.Find(label); ref && ref->level == 1) return ref->index;
  try {
    std::size_t used = 0;
    const unsigned long index = std::stoul(label, &used);
    if (used == label.size() && index < t.num_leaves()) return index;
  } catch (const std::exception&) {
  }
  throw Error(ErrorCode::kIndexOutOfRange, "unknown leaf '" + label + "'");
}

int CmdLoss(Runner& run, const LossFlags& flags, const std::string& probs_path,
            const std::string& target_label,
            std::optional<double> bertinetto_alpha) {
  const Taxonomy& t = run.taxonomy();
  const LossConfig loss = run.ResolveLoss(flags);
  const LevelWeights weights = loss.ResolveWeights(t.levels());
  const TargetSpec target = MakeTarget(t, ResolveLeaf(t, target_label));
  const auto batch = ParseProbabilityBatch(ReadTextFile(probs_path));
  std::ostringstream out;
  for (const auto& row : batch) {
    const ProbVector p{1, row, loss.mode == AggregationMode::kSum};
    const LossBreakdown b =
        HierarchicalLoss(p, t, target, weights, loss.mode, loss.base);
    for (std::size_t l = 0; l < b.per_level.size(); ++l) {
      out << "level " << l + 1 << ": weight " << G12(weights.values[l])
          << " loss " << G12(b.per_level[l]) << "\n";
    }
    out << "total: " << G12(b.total) << "\n";
    if (bertinetto_alpha) {
      out << "conditional hxe (alpha " << G12(*bertinetto_alpha)
          << "): " << G12(BertinettoHxe(p, t, target, *bertinetto_alpha))
          << "\n";
    }
  }
  run.Emit(out.str());
  return kExitOk;
}

int CmdGradCheck(Runner& run, const LossFlags& flags, int trials,
                 double tolerance) {
  const Taxonomy& t = run.taxonomy();
  if (trials < 1) throw Error(ErrorCode::kConfig, "trials must be >= 1");
  const LossConfig loss = run.ResolveLoss(flags);
  const HierarchicalObjective objective(t, loss.ResolveWeights(t.levels()),
                                        loss.mode, loss.base);
  const GradCheckResult r = RunGradCheck(objective, trials, run.config().seed);
  const bool pass = r.max_relative_error < tolerance;
  std::ostringstream out;
  out << "mode: " << AggregationModeName(loss.mode) << ", base: "
      << (loss.base.kind == BaseLossKind::kFocal ? "focal" : "ce") << "\n";
  out << "trials: " << r.trials << "\n";
  out << "max relative error: " << Fmt("%.6e", r.max_relative_error) << "\n";
  out << "tolerance: " << Fmt("%.6e", tolerance) << "\n";
  out << (pass ? "PASS" : "FAIL") << "\n";
  run.Emit(out.str());
  return pass ? kExitOk : kExitCheckFailed;
}

int CmdEvalDet(Runner& run, const std::string& gt_path,
               const std::string& det_path, const std::string& mode_name,
               const std::vector<double>& iou_thresholds) {
  const Taxonomy& t = run.taxonomy();
  RunConfig& cfg = run.config();
  AggregationMode mode = cfg.eval_mode;
  if (!mode_name.empty()) {
    auto parsed = ParseAggregationMode(mode_name);
    if (!parsed) throw Error(ErrorCode::kConfig, "unknown mode " + mode_name);
    mode = *parsed;
  }
  EvalConfig eval = cfg.eval;
  if (!iou_thresholds.empty()) eval.iou_thresholds = iou_thresholds;
  eval.Validate();
  const GroundTruthSet gts = ParseGroundTruth(ReadTextFile(gt_path), t);
  const DetectionSet dets = ParseDetections(ReadTextFile(det_path), t);
  const LevelEvalReport report = MultiLevelMap(dets, gts, t, mode, eval);

  std::cout << "level  classes  mAP\n";
  for (int l = 1; l <= t.levels(); ++l) {
    std::cout << l << "      " << t.num_classes(l) << "        "
              << Fmt("%.4f", report.per_level_map[l - 1]) << "\n";
  }
  const std::string path = run.OutPath();
  if (!path.empty()) WriteTextFile(path, ReportToJson(report, t, mode, eval));
  return kExitOk;
}

int CmdEvalCls(Runner& run, const std::string& preds_path,
               const std::vector<std::size_t>& ks) {
  const Taxonomy& t = run.taxonomy();
  const auto preds = ParsePredictions(ReadTextFile(preds_path), t);
  std::ostringstream out;
  out << "samples: " << preds.size() << "\n";
  out << "top1_error: " << Fmt("%.4f", Top1Error(preds)) << "\n";
  const MistakeSeverity severity = HierDistMistake(preds, t);
  out << "hier_dist_mistake: " << Fmt("%.4f", severity.mean_lca_height);
  if (severity.no_mistakes()) out << " (no mistakes)";
  out << "\n";
  for (std::size_t k : ks) {
    out << "avg_hier_dist@" << k << ": "
        << Fmt("%.4f", AvgHierDistAtK(preds, t, k)) << "\n";
  }
  run.Emit(out.str());
  return kExitOk;
}

int CmdTrainDemo(Runner& run, const LossFlags& flags,
                 const std::string& loss_kind, std::optional<int> steps) {
  const Taxonomy& t = run.taxonomy();
  RunConfig& cfg = run.config();
  const LossConfig loss = run.ResolveLoss(flags);
  TrainConfig train;
  train.loss = cfg.train.loss;
  if (loss_kind == "plain") {
    train.loss = DemoLoss::kPlain;
  } else if (loss_kind == "hierarchical") {
    train.loss = DemoLoss::kHierarchical;
  } else if (!loss_kind.empty()) {
    throw Error(ErrorCode::kConfig, "--loss must be plain or hierarchical");
  }
  train.mode = loss.mode;
  train.base = loss.base;
  if (train.loss == DemoLoss::kHierarchical) {
    train.weights = loss.ResolveWeights(t.levels());
  }
  train.steps = steps.value_or(cfg.train.steps);
  train.step_size = cfg.train.step_size;
  train.seed = cfg.seed;
  const DemoDataset data =
      MakeGaussianClusters(t, cfg.train.dataset, cfg.seed);
  const TrainResult result = TrainDemo(data, t, train);
  run.Emit(TraceToCsv(result.trace));
  const EpochMetrics& last = result.trace.back();
  std::cerr << "final top1_error " << Fmt("%.4f", last.top1_error)
            << ", avg_mistake_lca " << Fmt("%.4f", last.avg_mistake_lca)
            << "\n";
  return kExitOk;
}

int Main(int argc, char** argv) {
  CLI::App app{"Hierarchical probability aggregation, losses and evaluation"};
  app.require_subcommand(1);
  GlobalOptions global;
  std::uint64_t seed = 0;
  app.add_option("--taxonomy", global.taxonomy_path, "taxonomy JSON file");
  app.add_option("--config", global.config_path, "run configuration JSON");
  auto* seed_opt = app.add_option("--seed", seed, "random seed (default 0)");
  app.add_option("--out", global.out_path, "output file");

  auto* validate = app.add_subcommand("validate", "check a taxonomy file");
  std::string positional_taxonomy;
  validate->add_option("taxonomy", positional_taxonomy, "taxonomy JSON file");

  auto* aggregate =
      app.add_subcommand("aggregate", "aggregate leaf probabilities upward");
  std::string probs_path;
  std::string mode_name = "union";
  int level = 2;
  aggregate->add_option("--probs", probs_path, "probabilities JSON")
      ->required();
  aggregate->add_option("--mode", mode_name, "sum or union");
  aggregate->add_option("--level", level, "target level (default 2)");

  auto* loss = app.add_subcommand("loss", "evaluate the hierarchical loss");
  LossFlags loss_flags;
  std::string target_label;
  std::optional<double> bertinetto_alpha;
  AddLossFlags(loss, loss_flags);
  loss->add_option("--probs", probs_path, "leaf probabilities JSON")
      ->required();
  loss->add_option("--target", target_label, "target leaf index or id")
      ->required();
  loss->add_option("--bertinetto-alpha", bertinetto_alpha,
                   "also report the conditional-probability baseline");

  auto* gradcheck = app.add_subcommand(
      "grad-check", "finite-difference check of the hierarchical gradient");
  LossFlags grad_flags;
  int trials = 100;
  double tolerance = 1e-5;
  AddLossFlags(gradcheck, grad_flags);
  gradcheck->add_option("--trials", trials, "random trials (default 100)");
  gradcheck->add_option("--tolerance", tolerance,
                        "max relative error (default 1e-5)");

  auto* eval_det =
      app.add_subcommand("eval-det", "per-level detection mAP");
  std::string gt_path;
  std::string det_path;
  std::string det_mode;
  std::vector<double> iou_thresholds;
  eval_det->add_option("--gt", gt_path, "ground-truth JSON")->required();
  eval_det->add_option("--dets", det_path, "detections JSON")->required();
  eval_det->add_option("--mode", det_mode, "sum or union (default union)");
  eval_det->add_option("--iou-thresholds", iou_thresholds,
                       "comma-separated IoU thresholds")
      ->delimiter(',');

  auto* eval_cls =
      app.add_subcommand("eval-cls", "classification mistake severity");
  std::string preds_path;
  std::vector<std::size_t> ks = {1};
  eval_cls->add_option("--preds", preds_path, "predictions JSON")->required();
  eval_cls->add_option("--k", ks, "comma-separated k values for @k metrics")
      ->delimiter(',');

  auto* train = app.add_subcommand("train-demo", "2-D training demo");
  LossFlags train_flags;
  std::string train_loss;
  std::optional<int> steps;
  AddLossFlags(train, train_flags);
  train->add_option("--loss", train_loss, "plain or hierarchical");
  train->add_option("--steps", steps, "gradient steps");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int status = app.exit(e);
    return status == 0 ? kExitOk : kExitDomain;
  }
  if (seed_opt->count() > 0) global.seed = seed;
  if (!positional_taxonomy.empty()) global.taxonomy_path = positional_taxonomy;

  Runner run(global);
  try {
    if (*validate) return CmdValidate(run);
    if (*aggregate) return CmdAggregate(run, probs_path, mode_name, level);
    if (*loss) {
      return CmdLoss(run, loss_flags, probs_path, target_label,
                     bertinetto_alpha);
    }
    if (*gradcheck) return CmdGradCheck(run, grad_flags, trials, tolerance);
    if (*eval_det) {
      return CmdEvalDet(run, gt_path, det_path, det_mode, iou_thresholds);
    }
    if (*eval_cls) return CmdEvalCls(run, preds_path, ks);
    if (*train) return CmdTrainDemo(run, train_flags, train_loss, steps);
  } catch (const Error& e) {
    std::cerr << "hierloss: " << e.what() << "\n";
    return ExitCodeFor(e.code());
  }
  return kExitDomain;
}

}  // namespace
}  // namespace hierloss

int main(int argc, char** argv) { return hierloss::Main(argc, argv); }
