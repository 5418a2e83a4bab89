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
#include <string>
#include <utility>
#include <vector>

#include "hierloss/error.h"
#include "hierloss/io.h"
#include "hierloss/taxonomy.h"
#include "json.hpp"

namespace hierloss {

namespace {

using nlohmann::json;

[[noreturn]] void Malformed(const std::string& message) {
  throw Error(ErrorCode::kParse, message);
}

std::string IdString(const json& value, const char* what) {
  if (value.is_string()) return value.get<std::string>();
  if (value.is_number_integer()) return std::to_string(value.get<long long>());
  Malformed(std::string(what) + " must be a string or integer");
}

}  // namespace

Taxonomy ParseTaxonomy(std::string_view document) {
  json doc = json::parse(document, nullptr, /*allow_exceptions=*/false);
  if (doc.is_discarded()) Malformed("taxonomy document is not valid JSON");
  if (!doc.is_object() || !doc.contains("nodes") || !doc["nodes"].is_array()) {
    Malformed("taxonomy document needs a top-level \"nodes\" list");
  }
  std::vector<TaxonomyNode> nodes;
  for (const json& entry : doc["nodes"]) {
    if (!entry.is_object()) Malformed("taxonomy node must be an object");
    if (!entry.contains("id")) Malformed("taxonomy node without \"id\"");
    if (!entry.contains("level") || !entry["level"].is_number_integer()) {
      Malformed("taxonomy node needs an integer \"level\"");
    }
    TaxonomyNode node;
    node.id = IdString(entry["id"], "node id");
    node.level = entry["level"].get<int>();
    if (entry.contains("name")) {
      if (!entry["name"].is_string()) Malformed("node name must be a string");
      node.name = entry["name"].get<std::string>();
    }
    if (entry.contains("parent") && !entry["parent"].is_null()) {
      node.parent_id = IdString(entry["parent"], "parent id");
    }
    nodes.push_back(std::move(node));
  }
  return Taxonomy::FromNodes(std::move(nodes));
}

Taxonomy LoadTaxonomy(const std::filesystem::path& path) {
  return ParseTaxonomy(ReadTextFile(path));
}

}  // namespace hierloss
