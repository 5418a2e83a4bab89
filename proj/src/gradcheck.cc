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
#include "hierloss/gradcheck.h"

#include <algorithm>
#include <cmath>
#include <random>

#include "hierloss/error.h"

namespace hierloss {

double RelativeError(double analytic, double numeric) {
  const double diff = std::abs(analytic - numeric);
  const double scale = std::max(std::abs(analytic), std::abs(numeric));
  return scale < 1e-8 ? diff : diff / scale;
}

std::vector<double> CentralDifference(
    const std::function<double(std::span<const double>)>& f,
    std::span<const double> x, double step) {
  std::vector<double> probe(x.begin(), x.end());
  std::vector<double> grad(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    probe[i] = x[i] + step;
    const double up = f(probe);
    probe[i] = x[i] - step;
    const double down = f(probe);
    probe[i] = x[i];
    grad[i] = (up - down) / (2.0 * step);
  }
  return grad;
}

GradCheckResult RunGradCheck(const HierarchicalObjective& objective,
                             int trials, std::uint64_t seed, double step) {
  if (trials < 1) throw Error(ErrorCode::kConfig, "trials must be >= 1");
  const std::size_t leaves = objective.taxonomy().num_leaves();
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> mass(0.05, 1.0);
  std::uniform_real_distribution<double> score(0.01, 0.99);
  std::uniform_int_distribution<std::size_t> pick(0, leaves - 1);

  GradCheckResult result{trials, 0.0};
  std::vector<double> p(leaves);
  for (int trial = 0; trial < trials; ++trial) {
    if (objective.mode() == AggregationMode::kSum) {
      double total = 0.0;
      for (double& v : p) total += v = mass(rng);
      for (double& v : p) v /= total;
    } else {
      for (double& v : p) v = score(rng);
    }
    const TargetSpec target = MakeTarget(objective.taxonomy(), pick(rng));
    const auto analytic = objective.Gradient(p, target);
    const auto numeric = CentralDifference(
        [&](std::span<const double> x) {
          return objective.Evaluate(x, target).total;
        },
        p, step);
    for (std::size_t i = 0; i < leaves; ++i) {
      result.max_relative_error = std::max(
          result.max_relative_error, RelativeError(analytic[i], numeric[i]));
    }
  }
  return result;
}

}  // namespace hierloss
