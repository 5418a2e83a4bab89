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
#include "hierloss/taxonomy.h"

#include <algorithm>
#include <string>
#include <utility>

#include "hierloss/error.h"

namespace hierloss {

namespace {

[[noreturn]] void Invalid(const std::string& message) {
  throw Error(ErrorCode::kValidation, message);
}

// Returns the id of a node on a parent cycle, if there is one. Parents must
// already be known to exist.
std::optional<std::string> FindCycle(
    const std::vector<TaxonomyNode>& nodes,
    const std::unordered_map<std::string, std::size_t>& position) {
  enum class Mark { kNone, kOnPath, kDone };
  std::vector<Mark> mark(nodes.size(), Mark::kNone);
  for (std::size_t start = 0; start < nodes.size(); ++start) {
    std::vector<std::size_t> path;
    std::size_t cur = start;
    while (true) {
      if (mark[cur] == Mark::kDone) break;
      if (mark[cur] == Mark::kOnPath) return nodes[cur].id;
      mark[cur] = Mark::kOnPath;
      path.push_back(cur);
      if (!nodes[cur].parent_id) break;
      cur = position.at(*nodes[cur].parent_id);
    }
    for (std::size_t n : path) mark[n] = Mark::kDone;
  }
  return std::nullopt;
}

}  // namespace

LevelMatrix::LevelMatrix(std::vector<std::size_t> parent_of_row,
                         std::size_t cols)
    : parent_of_row_(std::move(parent_of_row)), cols_(cols) {}

DenseMatrix LevelMatrix::ToDense() const {
  DenseMatrix m(rows(), cols());
  for (std::size_t r = 0; r < rows(); ++r) m(r, parent_of_row_[r]) = 1.0;
  return m;
}

Taxonomy Taxonomy::FromNodes(std::vector<TaxonomyNode> nodes) {
  if (nodes.empty()) Invalid("taxonomy has no nodes");

  std::unordered_map<std::string, std::size_t> position;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const TaxonomyNode& n = nodes[i];
    if (n.id.empty()) Invalid("node " + std::to_string(i) + " has empty id");
    if (n.level < 1) {
      Invalid("node '" + n.id + "' has level " + std::to_string(n.level) +
              " (levels start at 1)");
    }
    if (!position.emplace(n.id, i).second) {
      Invalid("duplicate node id '" + n.id + "'");
    }
  }
  for (const TaxonomyNode& n : nodes) {
    if (n.parent_id && !position.contains(*n.parent_id)) {
      Invalid("node '" + n.id + "' references unknown parent '" +
              *n.parent_id + "'");
    }
  }
  if (auto on_cycle = FindCycle(nodes, position)) {
    Invalid("cycle detected through node '" + *on_cycle + "'");
  }

  std::size_t roots = 0;
  int max_level = 0;
  for (const TaxonomyNode& n : nodes) {
    if (!n.parent_id) ++roots;
    max_level = std::max(max_level, n.level);
  }
  const bool flat = roots > 1 && roots == nodes.size() && max_level == 1;
  if (roots > 1 && !flat) {
    Invalid("taxonomy has " + std::to_string(roots) + " roots, expected 1");
  }

  std::vector<std::size_t> child_count(nodes.size(), 0);
  for (const TaxonomyNode& n : nodes) {
    if (!n.parent_id) continue;
    const TaxonomyNode& parent = nodes[position.at(*n.parent_id)];
    if (parent.level != n.level + 1) {
      Invalid("node '" + n.id + "' at level " + std::to_string(n.level) +
              " has parent '" + parent.id + "' at level " +
              std::to_string(parent.level) + ", expected " +
              std::to_string(n.level + 1));
    }
    ++child_count[position.at(parent.id)];
  }
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    if (nodes[i].level > 1 && child_count[i] == 0) {
      Invalid("node '" + nodes[i].id + "' at level " +
              std::to_string(nodes[i].level) +
              " has no children; all leaves must be at level 1");
    }
  }

  Taxonomy t;
  t.flat_ = flat;
  const int depth = max_level;
  t.by_level_.resize(depth);
  for (TaxonomyNode& n : nodes) {
    if (n.name.empty()) n.name = n.id;
    t.by_level_[n.level - 1].push_back(std::move(n));
  }
  for (auto& level_nodes : t.by_level_) {
    std::sort(level_nodes.begin(), level_nodes.end(),
              [](const TaxonomyNode& a, const TaxonomyNode& b) {
                return a.id < b.id;
              });
  }
  for (int l = 1; l <= depth; ++l) {
    const auto& level_nodes = t.by_level_[l - 1];
    for (std::size_t i = 0; i < level_nodes.size(); ++i) {
      t.index_of_.emplace(level_nodes[i].id, NodeRef{l, i});
    }
  }

  t.parent_.resize(depth);
  t.children_.resize(depth);
  for (int l = 1; l < depth; ++l) {
    const auto& level_nodes = t.by_level_[l - 1];
    auto& parents = t.parent_[l - 1];
    auto& kids = t.children_[l];
    kids.resize(t.by_level_[l].size());
    parents.reserve(level_nodes.size());
    for (std::size_t i = 0; i < level_nodes.size(); ++i) {
      const std::size_t p = t.index_of_.at(*level_nodes[i].parent_id).index;
      parents.push_back(p);
      kids[p].push_back(i);
    }
  }

  const std::size_t leaves = t.by_level_[0].size();
  t.ancestors_.resize(leaves);
  for (std::size_t leaf = 0; leaf < leaves; ++leaf) {
    auto& chain = t.ancestors_[leaf];
    chain.reserve(depth);
    std::size_t cur = leaf;
    chain.push_back(cur);
    for (int l = 1; l < depth; ++l) {
      cur = t.parent_[l - 1][cur];
      chain.push_back(cur);
    }
  }
  return t;
}

Taxonomy Taxonomy::Flat(std::size_t num_classes) {
  std::vector<TaxonomyNode> nodes;
  nodes.reserve(num_classes);
  // Zero-padded ids keep the sorted order equal to the numeric order.
  const std::size_t width = std::to_string(num_classes).size();
  for (std::size_t i = 0; i < num_classes; ++i) {
    std::string digits = std::to_string(i);
    digits.insert(0, width - digits.size(), '0');
    nodes.push_back({"c" + digits, "c" + digits, std::nullopt, 1});
  }
  return FromNodes(std::move(nodes));
}

void Taxonomy::CheckLevel(int level, int max_level) const {
  if (level < 1 || level > max_level) {
    throw Error(ErrorCode::kLevelOutOfRange,
                "level " + std::to_string(level) + " outside [1, " +
                    std::to_string(max_level) + "]");
  }
}

void Taxonomy::CheckLeaf(std::size_t leaf) const {
  if (leaf >= num_leaves()) {
    throw Error(ErrorCode::kIndexOutOfRange,
                "leaf index " + std::to_string(leaf) + " >= " +
                    std::to_string(num_leaves()));
  }
}

std::size_t Taxonomy::num_classes(int level) const {
  CheckLevel(level, levels());
  return by_level_[level - 1].size();
}

std::vector<std::size_t> Taxonomy::class_counts() const {
  std::vector<std::size_t> counts;
  for (const auto& level_nodes : by_level_) counts.push_back(level_nodes.size());
  return counts;
}

const TaxonomyNode& Taxonomy::node(int level, std::size_t index) const {
  CheckLevel(level, levels());
  const auto& level_nodes = by_level_[level - 1];
  if (index >= level_nodes.size()) {
    throw Error(ErrorCode::kIndexOutOfRange,
                "index " + std::to_string(index) + " at level " +
                    std::to_string(level));
  }
  return level_nodes[index];
}

std::optional<NodeRef> Taxonomy::Find(std::string_view id) const {
  auto it = index_of_.find(std::string(id));
  if (it == index_of_.end()) return std::nullopt;
  return it->second;
}

std::size_t Taxonomy::parent_index(int level, std::size_t index) const {
  CheckLevel(level, levels() - 1);
  const auto& parents = parent_[level - 1];
  if (index >= parents.size()) {
    throw Error(ErrorCode::kIndexOutOfRange,
                "index " + std::to_string(index) + " at level " +
                    std::to_string(level));
  }
  return parents[index];
}

std::span<const std::size_t> Taxonomy::children(int level,
                                                std::size_t index) const {
  if (level < 2 || level > levels()) {
    throw Error(ErrorCode::kLevelOutOfRange,
                "level " + std::to_string(level) + " has no children");
  }
  const auto& kids = children_[level - 1];
  if (index >= kids.size()) {
    throw Error(ErrorCode::kIndexOutOfRange,
                "index " + std::to_string(index) + " at level " +
                    std::to_string(level));
  }
  return kids[index];
}

std::size_t Taxonomy::max_children() const {
  std::size_t best = 0;
  for (const auto& level_children : children_)
    for (const auto& kids : level_children) best = std::max(best, kids.size());
  return best;
}

LevelMatrix Taxonomy::transition_matrix(int level) const {
  CheckLevel(level, levels() - 1);
  return LevelMatrix(parent_[level - 1], by_level_[level].size());
}

std::size_t Taxonomy::map_leaf_to_level(std::size_t leaf_index,
                                        int level) const {
  CheckLeaf(leaf_index);
  CheckLevel(level, levels());
  return ancestors_[leaf_index][level - 1];
}

int Taxonomy::lca_height(std::size_t leaf_a, std::size_t leaf_b) const {
  CheckLeaf(leaf_a);
  CheckLeaf(leaf_b);
  if (leaf_a == leaf_b) return 0;
  if (flat_) return 1;
  const auto& a = ancestors_[leaf_a];
  const auto& b = ancestors_[leaf_b];
  for (int l = 1; l <= levels(); ++l) {
    if (a[l - 1] == b[l - 1]) return l - 1;
  }
  // Unreachable for a single-rooted tree.
  return levels() - 1;
}

}  // namespace hierloss
