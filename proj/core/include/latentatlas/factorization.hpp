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

// Closed-form factorization of the generator's style affines: the leading
// eigenvectors of A^T A are the latent directions that move the style vectors
// (and hence the image) the most.

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "latentatlas/gen_core.hpp"

namespace latentatlas {

enum class Category { kVascular, kAnatomical, kDebris, kAbnormal };

const char* to_string(Category c);
/// Throws InvalidInput for anything outside the four categories.
Category parse_category(const std::string& name);

struct AttributeDirection {
  Eigen::VectorXd vector;  // unit norm
  double eigenvalue = 0.0;
  int rank = 0;  // 0 = largest eigenvalue
  std::optional<std::string> label;
  std::optional<Category> category;
  std::optional<bool> pathology_relevant;

  bool operator==(const AttributeDirection&) const = default;
};

inline constexpr int kDefaultDirectionCount = 32;

/// Row-concatenation of the selected blocks' affine matrices, each row scaled
/// to unit L2 norm (all-zero rows stay zero).
Eigen::MatrixXd stack_affine(const StyleWeights& weights,
                             std::span<const int> layers);
/// All synthesis blocks.
Eigen::MatrixXd stack_affine(const StyleWeights& weights);

/// Unit eigenvectors of A^T A for the `count` largest eigenvalues, descending.
/// Each vector's first non-negligible component is positive; equal
/// eigenvalues are ordered by descending lexicographic vector entries.
std::vector<AttributeDirection> sefa(const Eigen::MatrixXd& affine, int count);

struct SpectrumCheck {
  int rank = 0;
  double eigenvalue = 0.0;
  double recomputed = 0.0;  // ||A v||^2
  double relative_residual = 0.0;
  bool ok = false;
};

struct SpectrumReport {
  std::vector<SpectrumCheck> checks;
  bool all_ok() const;
  std::vector<int> failed_ranks() const;
};

SpectrumReport verify_spectrum(const Eigen::MatrixXd& affine,
                               std::span<const AttributeDirection> directions,
                               double tolerance = 1e-8);

// Direction manifest JSON:
//   {"schema": "directions/1", "directions": [{rank, eigenvalue, vector,
//    label, category, pathology_relevant}, ...]}
nlohmann::json to_json(const AttributeDirection& direction);
AttributeDirection direction_from_json(const nlohmann::json& j);
nlohmann::json directions_manifest(std::span<const AttributeDirection> directions);
std::vector<AttributeDirection> parse_directions_manifest(const nlohmann::json& j);

}  // namespace latentatlas
