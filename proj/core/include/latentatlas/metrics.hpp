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

// Frechet distance between Gaussian fits of image feature sets, and
// checkpoint selection by minimum distance.

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "latentatlas/features.hpp"
#include "latentatlas/gen_core.hpp"
#include "latentatlas/image.hpp"

namespace latentatlas {

inline constexpr int kDefaultGenCount = 200;
inline constexpr double kEigenClampTolerance = 1e-8;
inline constexpr double kFdNegativeSlack = 1e-7;  // per feature dimension
inline constexpr const char* kFdLabel = "FD (shallow features)";

struct GaussianSummary {
  Eigen::VectorXd mu;
  Eigen::MatrixXd sigma;
};

/// Sample mean and unbiased covariance of the rows of `features`.
GaussianSummary fit_gaussian(const Eigen::MatrixXd& features);
GaussianSummary fit_gaussian(std::span<const FeatureVector> features);

/// PSD square root via the symmetric eigendecomposition. Eigenvalues below
/// -1e-8 * max(1, max|lambda|) raise NumericalFailure; smaller negatives are
/// clamped to zero.
Eigen::MatrixXd psd_sqrt(const Eigen::MatrixXd& symmetric);

double frechet_distance(const GaussianSummary& g1, const GaussianSummary& g2);

/// `count` images from z seeds derived from `seed`, psi = 1, zero noise.
std::vector<Image> generate_images(const StyleWeights& weights, int count,
                                   std::uint64_t seed);

double fd_between_image_sets(std::span<const Image> real, std::span<const Image> generated,
                             const FeatureExtractor& extractor);

double fid_between_sets(std::span<const Image> real, int gen_count,
                        const StyleWeights& weights, const FeatureExtractor& extractor,
                        std::uint64_t seed = 0);

struct CheckpointSelection {
  std::size_t best_index = 0;
  std::vector<double> scores;
};

/// Argmin with ties resolved to the earliest index. Empty input -> InvalidInput.
std::size_t argmin_earliest(std::span<const double> scores);

CheckpointSelection select_checkpoint(std::span<const StyleWeights> checkpoints,
                                      std::span<const Image> real, const FeatureExtractor& extractor,
                                      int gen_count = kDefaultGenCount, std::uint64_t seed = 0);

struct FdReport {
  std::string checkpoint;
  double score = 0.0;
  int n_real = 0;
  int n_gen = 0;
  std::string extractor_id;
};

nlohmann::json to_json(const FdReport& report);
void write_fd_report(const FdReport& report, const std::filesystem::path& path);

}  // namespace latentatlas
