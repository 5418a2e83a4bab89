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
#ifndef HIERLOSS_GRADCHECK_H_
#define HIERLOSS_GRADCHECK_H_

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "hierloss/losses.h"

namespace hierloss {

// |a - n| / max(|a|, |n|), or |a - n| when both are below 1e-8.
double RelativeError(double analytic, double numeric);

std::vector<double> CentralDifference(
    const std::function<double(std::span<const double>)>& f,
    std::span<const double> x, double step);

struct GradCheckResult {
  int trials = 0;
  double max_relative_error = 0.0;
};

// Compares HierarchicalObjective::Gradient with central differences of
// Evaluate on seeded random inputs: normalized distributions with entries
// bounded away from 0 in sum mode, independent scores in [0.01, 0.99] in
// union mode, and a uniformly drawn target leaf.
GradCheckResult RunGradCheck(const HierarchicalObjective& objective,
                             int trials, std::uint64_t seed,
                             double step = 1e-5);

}  // namespace hierloss

#endif  // HIERLOSS_GRADCHECK_H_
