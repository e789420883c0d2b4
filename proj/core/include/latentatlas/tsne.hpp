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

// Exact O(n^2) t-SNE.

#include <Eigen/Dense>

#include <cstdint>

namespace latentatlas {

struct TsneConfig {
  double perplexity = 30.0;
  int iterations = 1000;
  std::uint64_t seed = 0;
  // <= 0 picks max(n / (4 * early_exaggeration), 50). A fixed 200 splits
  // clusters on small n.
  double learning_rate = 0.0;
  double early_exaggeration = 12.0;
  int exaggeration_iterations = 250;
  double initial_momentum = 0.5;
  double final_momentum = 0.8;
  int momentum_switch = 250;
  double entropy_tolerance = 1e-5;
  int calibration_iterations = 50;
};

struct Embedding2D {
  Eigen::MatrixXd points;  // n x 2
  double kl_initial = 0.0;
  double kl_final = 0.0;
  std::uint64_t seed = 0;
  double perplexity = 0.0;  // after any automatic lowering
  bool kl_decreased = true;
};

struct Affinities {
  Eigen::MatrixXd conditional;  // row i holds p_{j|i}
  Eigen::VectorXd betas;        // precision 1 / (2 sigma_i^2)
  Eigen::VectorXd perplexities; // achieved exp(H_i)
};

/// Binary search per point for the Gaussian precision whose conditional
/// distribution has entropy log(perplexity).
Affinities calibrate_affinities(const Eigen::MatrixXd& squared_distances,
                                double perplexity, double tolerance = 1e-5,
                                int max_iterations = 50);

Eigen::MatrixXd squared_distances(const Eigen::MatrixXd& rows);

/// KL(P || Q) for a joint P and the Student-t affinities Q of `points`.
double tsne_kl(const Eigen::MatrixXd& joint_p, const Eigen::MatrixXd& points);

/// Rows of `features` are points. Throws InvalidInput for n < 5 or
/// non-finite features. Perplexity is lowered to (n - 1) / 3 when n is too
/// small for the requested value.
Embedding2D tsne(const Eigen::MatrixXd& features, const TsneConfig& config = {});

}  // namespace latentatlas
