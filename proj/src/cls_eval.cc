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
#include "hierloss/cls_eval.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "hierloss/error.h"

namespace hierloss {

namespace {

void CheckNonEmpty(std::span<const ClsPrediction> preds) {
  if (preds.empty()) throw Error(ErrorCode::kEmptyInput, "no predictions");
}

}  // namespace

std::vector<std::size_t> TopK(std::span<const double> scores, std::size_t k) {
  k = std::min(k, scores.size());
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::partial_sort(order.begin(), order.begin() + k, order.end(),
                    [&](std::size_t a, std::size_t b) {
                      if (scores[a] != scores[b]) return scores[a] > scores[b];
                      return a < b;
                    });
  order.resize(k);
  return order;
}

std::size_t ArgMax(std::span<const double> scores) {
  if (scores.empty()) throw Error(ErrorCode::kEmptyInput, "empty score vector");
  std::size_t best = 0;
  for (std::size_t i = 1; i < scores.size(); ++i) {
    if (scores[i] > scores[best]) best = i;
  }
  return best;
}

void ValidatePredictions(std::span<const ClsPrediction> preds,
                         const Taxonomy& taxonomy) {
  const std::size_t leaves = taxonomy.num_leaves();
  for (const ClsPrediction& p : preds) {
    if (p.leaf_scores.size() != leaves) {
      throw Error(ErrorCode::kDataMismatch,
                  "sample '" + p.sample_id + "' has " +
                      std::to_string(p.leaf_scores.size()) +
                      " scores, taxonomy has " + std::to_string(leaves) +
                      " leaves");
    }
    if (p.true_leaf >= leaves) {
      throw Error(ErrorCode::kDataMismatch,
                  "sample '" + p.sample_id + "' has true leaf " +
                      std::to_string(p.true_leaf) + " out of range");
    }
    for (double s : p.leaf_scores) {
      if (std::isnan(s)) {
        throw Error(ErrorCode::kDataMismatch,
                    "sample '" + p.sample_id + "' has a NaN score");
      }
    }
  }
}

double Top1Error(std::span<const ClsPrediction> preds) {
  CheckNonEmpty(preds);
  std::size_t wrong = 0;
  for (const ClsPrediction& p : preds) {
    if (ArgMax(p.leaf_scores) != p.true_leaf) ++wrong;
  }
  return static_cast<double>(wrong) / static_cast<double>(preds.size());
}

MistakeSeverity HierDistMistake(std::span<const ClsPrediction> preds,
                                const Taxonomy& taxonomy) {
  CheckNonEmpty(preds);
  ValidatePredictions(preds, taxonomy);
  MistakeSeverity out;
  long long height_sum = 0;
  for (const ClsPrediction& p : preds) {
    const std::size_t predicted = ArgMax(p.leaf_scores);
    if (predicted == p.true_leaf) continue;
    height_sum += taxonomy.lca_height(predicted, p.true_leaf);
    ++out.num_mistakes;
  }
  if (out.num_mistakes > 0) {
    out.mean_lca_height = static_cast<double>(height_sum) /
                          static_cast<double>(out.num_mistakes);
  }
  return out;
}

double AvgHierDistAtK(std::span<const ClsPrediction> preds,
                      const Taxonomy& taxonomy, std::size_t k) {
  if (k < 1 || k > taxonomy.num_leaves()) {
    throw Error(ErrorCode::kKOutOfRange,
                "k = " + std::to_string(k) + " outside [1, " +
                    std::to_string(taxonomy.num_leaves()) + "]");
  }
  CheckNonEmpty(preds);
  ValidatePredictions(preds, taxonomy);
  double total = 0.0;
  for (const ClsPrediction& p : preds) {
    long long sum = 0;
    for (std::size_t leaf : TopK(p.leaf_scores, k)) {
      sum += taxonomy.lca_height(leaf, p.true_leaf);
    }
    total += static_cast<double>(sum) / static_cast<double>(k);
  }
  return total / static_cast<double>(preds.size());
}

}  // namespace hierloss
