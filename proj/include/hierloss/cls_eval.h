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
#ifndef HIERLOSS_CLS_EVAL_H_
#define HIERLOSS_CLS_EVAL_H_

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "hierloss/taxonomy.h"

namespace hierloss {

struct ClsPrediction {
  std::string sample_id;
  std::vector<double> leaf_scores;
  std::size_t true_leaf = 0;
};

// Indices of the k highest scores; ties go to the lower index.
std::vector<std::size_t> TopK(std::span<const double> scores, std::size_t k);
std::size_t ArgMax(std::span<const double> scores);

// Throws kDataMismatch when score vectors or labels do not fit the leaf level.
void ValidatePredictions(std::span<const ClsPrediction> preds,
                         const Taxonomy& taxonomy);

double Top1Error(std::span<const ClsPrediction> preds);

struct MistakeSeverity {
  // Mean LCA height over misclassified samples; 0 when there are none.
  double mean_lca_height = 0.0;
  std::size_t num_mistakes = 0;

  bool no_mistakes() const { return num_mistakes == 0; }
};

MistakeSeverity HierDistMistake(std::span<const ClsPrediction> preds,
                                const Taxonomy& taxonomy);

// Mean over samples of the mean LCA height between the true leaf and each of
// the k top-ranked leaves.
double AvgHierDistAtK(std::span<const ClsPrediction> preds,
                      const Taxonomy& taxonomy, std::size_t k);

}  // namespace hierloss

#endif  // HIERLOSS_CLS_EVAL_H_
