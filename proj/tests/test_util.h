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
#ifndef HIERLOSS_TESTS_TEST_UTIL_H_
#define HIERLOSS_TESTS_TEST_UTIL_H_

#include <optional>
#include <random>
#include <string>
#include <vector>

#include "hierloss/taxonomy.h"

namespace hierloss::testing {

inline std::string DataPath(const std::string& name) {
  return std::string(HIERLOSS_TEST_DATA_DIR) + "/" + name;
}

// root (L3) -> m0 {a, b}, m1 {c, d}. Leaves a, b, c, d have indices 0..3,
// mids m0, m1 indices 0..1.
inline Taxonomy SevenNode() {
  return Taxonomy::FromNodes({
      {"root", "entity", std::nullopt, 3},
      {"m0", "vehicle", "root", 2},
      {"m1", "animal", "root", 2},
      {"a", "car", "m0", 1},
      {"b", "truck", "m0", 1},
      {"c", "cat", "m1", 1},
      {"d", "dog", "m1", 1},
  });
}

inline Taxonomy ThreeNode() {
  return Taxonomy::FromNodes({
      {"root", "root", std::nullopt, 2},
      {"a", "a", "root", 1},
      {"b", "b", "root", 1},
  });
}

// Random uniform-depth tree: `depth` levels, each parent gets between 1 and
// `max_children` children, widths chosen so every level stays non-empty.
inline Taxonomy RandomTree(std::mt19937_64& rng, int depth,
                           int max_children) {
  std::uniform_int_distribution<int> fan(1, max_children);
  std::vector<TaxonomyNode> nodes;
  nodes.push_back({"n_root", "root", std::nullopt, depth});
  std::vector<std::string> frontier = {"n_root"};
  int counter = 0;
  for (int level = depth - 1; level >= 1; --level) {
    std::vector<std::string> next;
    for (const std::string& parent : frontier) {
      const int kids = fan(rng);
      for (int k = 0; k < kids; ++k) {
        std::string id = "n" + std::to_string(counter++);
        nodes.push_back({id, id, parent, level});
        next.push_back(id);
      }
    }
    frontier = std::move(next);
  }
  return Taxonomy::FromNodes(std::move(nodes));
}

}  // namespace hierloss::testing

#endif  // HIERLOSS_TESTS_TEST_UTIL_H_
