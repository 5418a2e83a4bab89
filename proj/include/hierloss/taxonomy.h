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
#ifndef HIERLOSS_TAXONOMY_H_
#define HIERLOSS_TAXONOMY_H_

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "hierloss/matrix.h"

namespace hierloss {

// Levels are 1-based: level 1 holds the leaves, level L the root.
struct TaxonomyNode {
  std::string id;
  std::string name;
  std::optional<std::string> parent_id;
  int level = 1;
};

// Position of a node inside the per-level dense index spaces.
struct NodeRef {
  int level = 1;
  std::size_t index = 0;
};

// One-hot child -> parent matrix between level l (rows) and level l+1
// (columns). Stored as the column of the single 1 in every row.
class LevelMatrix {
 public:
  LevelMatrix(std::vector<std::size_t> parent_of_row, std::size_t cols);

  std::size_t rows() const { return parent_of_row_.size(); }
  std::size_t cols() const { return cols_; }
  std::size_t parent_of(std::size_t row) const { return parent_of_row_[row]; }
  std::span<const std::size_t> parents() const { return parent_of_row_; }

  int operator()(std::size_t row, std::size_t col) const {
    return parent_of_row_[row] == col ? 1 : 0;
  }

  DenseMatrix ToDense() const;

 private:
  std::vector<std::size_t> parent_of_row_;
  std::size_t cols_;
};

// Validated, immutable class hierarchy with deterministic per-level indices
// (nodes of each level are indexed in ascending id order).
//
// A taxonomy is either a rooted tree whose leaves all sit at level 1, or a
// flat label set (L = 1, several parentless level-1 nodes). The flat form is
// the label space of an ordinary detector or classifier; distinct flat
// classes are treated as siblings under an implicit root.
class Taxonomy {
 public:
  // Throws Error(kValidation) when the nodes do not form a valid taxonomy.
  static Taxonomy FromNodes(std::vector<TaxonomyNode> nodes);

  // Flat label set "c0".."c{n-1}".
  static Taxonomy Flat(std::size_t num_classes);

  int levels() const { return static_cast<int>(by_level_.size()); }
  bool is_flat() const { return flat_; }

  std::size_t num_classes(int level) const;
  std::size_t num_leaves() const { return num_classes(1); }
  std::vector<std::size_t> class_counts() const;

  const TaxonomyNode& node(int level, std::size_t index) const;
  std::optional<NodeRef> Find(std::string_view id) const;

  // Index at level+1 of the parent of node (level, index). 1 <= level < L.
  std::size_t parent_index(int level, std::size_t index) const;

  // Level-(level-1) indices of the children of node (level, index), in
  // ascending index order. 2 <= level <= L.
  std::span<const std::size_t> children(int level, std::size_t index) const;

  std::size_t max_children() const;

  LevelMatrix transition_matrix(int level) const;
  std::size_t map_leaf_to_level(std::size_t leaf_index, int level) const;

  // Level of the lowest common ancestor minus one. Zero iff the leaves match.
  int lca_height(std::size_t leaf_a, std::size_t leaf_b) const;

 private:
  Taxonomy() = default;

  void CheckLevel(int level, int max_level) const;
  void CheckLeaf(std::size_t leaf) const;

  bool flat_ = false;
  std::vector<std::vector<TaxonomyNode>> by_level_;
  // parent_[l-1][i]: parent index at level l+1 of node i at level l.
  std::vector<std::vector<std::size_t>> parent_;
  // children_[l-1][i]: children at level l-1 of node i at level l (l >= 2).
  std::vector<std::vector<std::vector<std::size_t>>> children_;
  // ancestors_[leaf][l-1]: index of the level-l ancestor.
  std::vector<std::vector<std::size_t>> ancestors_;
  std::unordered_map<std::string, NodeRef> index_of_;
};

// Parses the JSON taxonomy document {"nodes": [{id, name, parent, level}]}.
// Throws Error(kParse) on malformed input and Error(kValidation) when the
// tree is invalid.
Taxonomy ParseTaxonomy(std::string_view document);

// Reads and parses a taxonomy file. Throws Error(kIo) if it can't be read.
Taxonomy LoadTaxonomy(const std::filesystem::path& path);

}  // namespace hierloss

#endif  // HIERLOSS_TAXONOMY_H_
