// Copyright 2026 The latentatlas Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

// Attribute atlas: traversal strips per direction, a joint t-SNE embedding of
// strip images and expert prototype images, and pathology-relevance labels
// for directions whose strips come close to a prototype.

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "latentatlas/factorization.hpp"
#include "latentatlas/features.hpp"
#include "latentatlas/gen_core.hpp"
#include "latentatlas/traversal.hpp"
#include "latentatlas/tsne.hpp"

namespace latentatlas {

struct Prototype {
  std::string id;
  std::string tag;  // e.g. "ulcer", "polyp"
  Image image;
};

/// What each row of a joint embedding represents.
struct EmbeddedItem {
  enum class Kind { kTraversal, kPrototype };
  Kind kind = Kind::kTraversal;
  int direction_rank = -1;  // kTraversal
  std::string prototype_id;  // kPrototype
};

inline constexpr int kDefaultNeighbourhood = 10;

/// A direction is pathology relevant iff at least one of its traversal points
/// is among the k nearest traversal points (Euclidean, in the embedding) of
/// some prototype. Ties in distance go to the lower row index.
std::vector<AttributeDirection> label_attributes(
    std::vector<AttributeDirection> directions, const Eigen::MatrixXd& points,
    std::span<const EmbeddedItem> items, int k = kDefaultNeighbourhood);

struct AtlasStrip {
  int rank = 0;
  std::vector<GeneratedImage> images;
};

struct AtlasConfig {
  LatentCode base_w;
  double interval_lo = 0.0;
  double interval_hi = 8.0;
  double step_alpha = kDefaultStepAlpha;
  bool allow_any_interval = false;
  NoiseSeed noise_seed = kZeroNoise;
};

std::vector<AtlasStrip> render_strips(std::span<const AttributeDirection> directions,
                                      const StyleWeights& weights,
                                      const AtlasConfig& config);

struct LabelingResult {
  std::vector<AttributeDirection> directions;
  Embedding2D embedding;
  std::vector<EmbeddedItem> items;
};

/// Embeds strips and prototypes jointly with t-SNE and labels directions.
LabelingResult embed_and_label(std::vector<AttributeDirection> directions,
                               std::span<const AtlasStrip> strips,
                               std::span<const Prototype> prototypes,
                               const TsneConfig& tsne_config,
                               int k = kDefaultNeighbourhood);

/// Groups shown in the atlas overview.
inline const std::vector<std::string> kAtlasGroups = {
    "vascular", "abnormal", "debris", "view/rotation", "anatomical", "modality"};
inline constexpr const char* kUngrouped = "unassigned";

/// Label keywords ("view", "rotation" -> view/rotation; "modality",
/// "illumination" -> modality) take precedence over the stored category.
std::string atlas_group(const AttributeDirection& direction);

struct AtlasStripEntry {
  int rank = 0;
  std::vector<double> alphas;
  std::vector<std::string> files;
  bool operator==(const AtlasStripEntry&) const = default;
};

struct AtlasEmbeddingPoint {
  double x = 0.0;
  double y = 0.0;
  std::string kind;  // "traversal" | "prototype"
  std::string ref;   // direction rank or prototype id
  bool operator==(const AtlasEmbeddingPoint&) const = default;
};

struct AtlasManifest {
  std::vector<AttributeDirection> directions;
  std::map<std::string, std::vector<int>> groups;
  std::vector<AtlasStripEntry> strips;
  std::optional<std::vector<AtlasEmbeddingPoint>> embedding;
  std::vector<std::pair<std::string, std::string>> prototypes;  // (id, tag)

  bool operator==(const AtlasManifest&) const = default;
};

nlohmann::json to_json(const AtlasManifest& manifest);
AtlasManifest atlas_manifest_from_json(const nlohmann::json& j);

/// `dir{rank}_a{alpha}.png`, alpha printed with %g.
std::string strip_file_name(int rank, double alpha);

/// Renders a strip per direction, writes the PNGs and `atlas.json` into
/// `out_dir`. `labeling`, when given, contributes the embedding and the
/// prototype list to the manifest.
AtlasManifest build_atlas(std::span<const AttributeDirection> directions,
                          const StyleWeights& weights, const AtlasConfig& config,
                          const std::filesystem::path& out_dir,
                          const LabelingResult* labeling = nullptr,
                          std::span<const Prototype> prototypes = {});

}  // namespace latentatlas
