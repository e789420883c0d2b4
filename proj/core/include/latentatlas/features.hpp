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

#include <Eigen/Dense>

#include <functional>
#include <span>
#include <string>

#include "latentatlas/image.hpp"

namespace latentatlas {

using FeatureVector = Eigen::VectorXd;

inline constexpr int kFeatureGrid = 8;
inline constexpr int kFeatureDim = kFeatureGrid * kFeatureGrid + 6;  // 70

/// 8x8 area-averaged grayscale thumbnail (row-major) followed by the mean and
/// population standard deviation of each RGB channel.
FeatureVector extract_features(const Image& image);

/// Pluggable image feature extractor with a stable identifier for reports.
struct FeatureExtractor {
  std::string id;
  std::function<FeatureVector(const Image&)> extract;
};

/// The default shallow extractor ("shallow-v1").
FeatureExtractor shallow_extractor();

/// Rows = images.
Eigen::MatrixXd feature_matrix(std::span<const Image> images,
                               const FeatureExtractor& extractor);

}  // namespace latentatlas
