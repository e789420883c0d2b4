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

// Latent traversal along attribute directions: code_j = base_w - alpha_j * a,
// with alpha_j = A + j * step over the interval [A, B].

#include <nlohmann/json.hpp>

#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "latentatlas/factorization.hpp"
#include "latentatlas/gen_core.hpp"

namespace latentatlas {

inline constexpr double kDefaultIntervalMax = 50.0;
inline constexpr double kDefaultStepAlpha = 2.0;
inline constexpr int kDefaultProgressionLength = 5;

struct TraversalSpec {
  LatentCode base_w;
  AttributeDirection direction;
  double interval_lo = 0.0;
  double interval_hi = kDefaultIntervalMax;
  double step_alpha = kDefaultStepAlpha;
  // The default policy keeps the interval inside [0, 50].
  bool allow_any_interval = false;
};

/// Throws InvalidInput when the spec violates its invariants.
void validate(const TraversalSpec& spec);

/// alpha_j = A + j * step for j = 0 .. floor((B - A) / step). A relative
/// slack of 1e-9 absorbs round-off so that e.g. [0, 0.3] step 0.1 keeps 0.3.
std::vector<double> traversal_alphas(const TraversalSpec& spec);
std::vector<LatentCode> traverse_codes(const TraversalSpec& spec);

/// One image per traversal code, tagged with the direction rank and alpha.
std::vector<GeneratedImage> render_traversal(const TraversalSpec& spec,
                                             const StyleWeights& weights,
                                             NoiseSeed noise_seed);

struct ProgressionSequence {
  std::string id;
  int direction_id = 0;
  LatentCode base_w;
  std::vector<double> alphas;  // strictly increasing: normal -> severe
  std::vector<LatentCode> codes;
  std::vector<GeneratedImage> images;
  std::optional<Category> category;
};

/// n equally spaced alphas from lo to hi inclusive.
std::vector<double> progression_alphas(double lo, double hi, int n);

ProgressionSequence make_progression(std::string id, const LatentCode& base_w,
                                     const AttributeDirection& direction,
                                     std::pair<double, double> interval,
                                     const StyleWeights& weights,
                                     NoiseSeed noise_seed,
                                     int n = kDefaultProgressionLength);

/// Returns a copy of `direction` tagged with `category` (one of vascular,
/// anatomical, debris, abnormal).
AttributeDirection assign_category(const AttributeDirection& direction,
                                   const std::string& category);

/// Progression manifest:
///   {id, direction_id, base_w, alphas, images, category}
nlohmann::json progression_manifest(const ProgressionSequence& seq,
                                    const std::vector<std::string>& image_files);

/// Writes `<id>_<k>.png` for each image and `<id>.json`; returns the manifest.
nlohmann::json write_progression(const ProgressionSequence& seq,
                                 const std::filesystem::path& dir);

}  // namespace latentatlas
