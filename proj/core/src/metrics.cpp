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

#include "latentatlas/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "latentatlas/errors.hpp"
#include "latentatlas/jacobi.hpp"
#include "latentatlas/rng.hpp"

namespace latentatlas {

GaussianSummary fit_gaussian(const Eigen::MatrixXd& features) {
  const Eigen::Index n = features.rows();
  if (n < 2) throw InvalidInput("fit_gaussian: at least two samples required");
  if (!features.allFinite()) throw InvalidInput("fit_gaussian: non-finite features");
  GaussianSummary g;
  g.mu = features.colwise().mean().transpose();
  const Eigen::MatrixXd centered = features.rowwise() - g.mu.transpose();
  const Eigen::MatrixXd cov = centered.transpose() * centered / static_cast<double>(n - 1);
  g.sigma = 0.5 * (cov + cov.transpose());
  return g;
}

GaussianSummary fit_gaussian(std::span<const FeatureVector> features) {
  if (features.size() < 2) throw InvalidInput("fit_gaussian: at least two samples required");
  const Eigen::Index dim = features.front().size();
  Eigen::MatrixXd m(static_cast<Eigen::Index>(features.size()), dim);
  for (std::size_t i = 0; i < features.size(); ++i) {
    if (features[i].size() != dim) throw InvalidDimension("fit_gaussian: ragged features");
    m.row(static_cast<Eigen::Index>(i)) = features[i].transpose();
  }
  return fit_gaussian(m);
}

Eigen::MatrixXd psd_sqrt(const Eigen::MatrixXd& symmetric) {
  const SymmetricEigen eig = jacobi_eigen(0.5 * (symmetric + symmetric.transpose()));
  const double scale = std::max(1.0, eig.values.cwiseAbs().maxCoeff());
  Eigen::VectorXd roots(eig.values.size());
  for (Eigen::Index i = 0; i < roots.size(); ++i) {
    const double v = eig.values[i];
    if (v < -kEigenClampTolerance * scale) {
      throw NumericalFailure("psd_sqrt: matrix is not positive semidefinite");
    }
    roots[i] = std::sqrt(std::max(v, 0.0));
  }
  return eig.vectors * roots.asDiagonal() * eig.vectors.transpose();
}

double frechet_distance(const GaussianSummary& g1, const GaussianSummary& g2) {
  const Eigen::Index d = g1.mu.size();
  if (g2.mu.size() != d || g1.sigma.rows() != d || g1.sigma.cols() != d ||
      g2.sigma.rows() != d || g2.sigma.cols() != d) {
    throw InvalidDimension("frechet_distance: dimension mismatch");
  }
  const Eigen::MatrixXd s1 = psd_sqrt(g1.sigma);
  const Eigen::MatrixXd inner = s1 * g2.sigma * s1;
  const Eigen::MatrixXd cross = psd_sqrt(inner);
  const double value = (g1.mu - g2.mu).squaredNorm() + g1.sigma.trace() + g2.sigma.trace() -
                       2.0 * cross.trace();
  if (!std::isfinite(value)) throw NumericalFailure("frechet_distance: non-finite result");
  // Null-space eigenvalues of the inner product come back as O(sqrt(eps))
  // after the square root, so the negative slack grows with the dimension.
  const double scale = std::max({1.0, g1.sigma.trace(), g2.sigma.trace()});
  if (value < -kFdNegativeSlack * static_cast<double>(d) * scale) {
    throw NumericalFailure("frechet_distance: negative distance");
  }
  return std::max(value, 0.0);
}

std::vector<Image> generate_images(const StyleWeights& weights, int count, std::uint64_t seed) {
  if (count < 0) throw InvalidInput("generate_images: negative count");
  std::vector<Image> images;
  images.reserve(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) {
    const LatentCode z =
        sample_z(weights.shape.latent_dim, derive_seed(seed, static_cast<std::uint64_t>(i)));
    images.push_back(synthesize(map_latent(z, weights, 1.0), weights, kZeroNoise).image);
  }
  return images;
}

double fd_between_image_sets(std::span<const Image> real, std::span<const Image> generated,
                             const FeatureExtractor& extractor) {
  if (real.size() < 2 || generated.size() < 2) {
    throw InvalidInput("fd: both sets need at least two images");
  }
  return frechet_distance(fit_gaussian(feature_matrix(real, extractor)),
                          fit_gaussian(feature_matrix(generated, extractor)));
}

double fid_between_sets(std::span<const Image> real, int gen_count, const StyleWeights& weights,
                        const FeatureExtractor& extractor, std::uint64_t seed) {
  if (real.size() < 2) throw InvalidInput("fd: real set needs at least two images");
  if (gen_count < 2) throw InvalidInput("fd: gen_count must be >= 2");
  const std::vector<Image> generated = generate_images(weights, gen_count, seed);
  return fd_between_image_sets(real, generated, extractor);
}

std::size_t argmin_earliest(std::span<const double> scores) {
  if (scores.empty()) throw InvalidInput("argmin: empty score list");
  std::size_t best = 0;
  for (std::size_t i = 1; i < scores.size(); ++i) {
    if (scores[i] < scores[best]) best = i;
  }
  return best;
}

CheckpointSelection select_checkpoint(std::span<const StyleWeights> checkpoints,
                                      std::span<const Image> real,
                                      const FeatureExtractor& extractor, int gen_count,
                                      std::uint64_t seed) {
  if (checkpoints.empty()) throw InvalidInput("select_checkpoint: no checkpoints");
  CheckpointSelection sel;
  for (const StyleWeights& w : checkpoints) {
    sel.scores.push_back(fid_between_sets(real, gen_count, w, extractor, seed));
  }
  sel.best_index = argmin_earliest(sel.scores);
  return sel;
}

nlohmann::json to_json(const FdReport& r) {
  return {{"checkpoint", r.checkpoint}, {"score", r.score},       {"n_real", r.n_real},
          {"n_gen", r.n_gen},           {"extractor_id", r.extractor_id}, {"label", kFdLabel}};
}

void write_fd_report(const FdReport& report, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open for writing", path.string());
  out << to_json(report).dump(2) << '\n';
  if (!out) throw IoError("write failed", path.string());
}

}  // namespace latentatlas
