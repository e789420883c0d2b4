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

#include "latentatlas/tsne.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "latentatlas/errors.hpp"

namespace latentatlas {

Eigen::MatrixXd squared_distances(const Eigen::MatrixXd& rows) {
  const Eigen::Index n = rows.rows();
  Eigen::MatrixXd d(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    d(i, i) = 0.0;
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const double v = (rows.row(i) - rows.row(j)).squaredNorm();
      d(i, j) = v;
      d(j, i) = v;
    }
  }
  return d;
}

Affinities calibrate_affinities(const Eigen::MatrixXd& sq, double perplexity,
                                double tolerance, int max_iterations) {
  const Eigen::Index n = sq.rows();
  const double target = std::log(perplexity);
  Affinities out;
  out.conditional = Eigen::MatrixXd::Zero(n, n);
  out.betas.resize(n);
  out.perplexities.resize(n);
  Eigen::VectorXd row(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    // Distances are shifted by the nearest neighbour so exp() cannot
    // underflow for every j; the conditional distribution is unchanged.
    double nearest = std::numeric_limits<double>::infinity();
    double mean = 0.0;
    for (Eigen::Index j = 0; j < n; ++j) {
      if (j == i) continue;
      nearest = std::min(nearest, sq(i, j));
    }
    for (Eigen::Index j = 0; j < n; ++j) {
      if (j != i) mean += sq(i, j) - nearest;
    }
    mean /= static_cast<double>(n - 1);

    double beta = mean > 0 ? 1.0 / mean : 1.0;
    double lo = 0.0, hi = std::numeric_limits<double>::infinity();
    double entropy = 0.0;
    for (int iter = 0; iter < max_iterations; ++iter) {
      double sum = 0.0, weighted = 0.0;
      for (Eigen::Index j = 0; j < n; ++j) {
        if (j == i) {
          row[j] = 0.0;
          continue;
        }
        const double shifted = sq(i, j) - nearest;
        row[j] = std::exp(-beta * shifted);
        sum += row[j];
        weighted += shifted * row[j];
      }
      entropy = std::log(sum) + beta * weighted / sum;
      const double diff = entropy - target;
      if (std::abs(diff) < tolerance) break;
      if (diff > 0) {
        lo = beta;
        beta = std::isinf(hi) ? beta * 2.0 : 0.5 * (beta + hi);
      } else {
        hi = beta;
        beta = 0.5 * (beta + lo);
      }
    }
    const double sum = row.sum();
    out.conditional.row(i) = row.transpose() / sum;
    out.betas[i] = beta;
    out.perplexities[i] = std::exp(entropy);
  }
  return out;
}

double tsne_kl(const Eigen::MatrixXd& p, const Eigen::MatrixXd& y) {
  const Eigen::Index n = y.rows();
  const Eigen::MatrixXd d = squared_distances(y);
  double z = 0.0;
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j)
      if (i != j) z += 1.0 / (1.0 + d(i, j));
  double kl = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      if (i == j || p(i, j) <= 0) continue;
      const double q = std::max(1.0 / (1.0 + d(i, j)) / z, 1e-300);
      kl += p(i, j) * std::log(p(i, j) / q);
    }
  }
  return kl;
}

Embedding2D tsne(const Eigen::MatrixXd& features, const TsneConfig& config) {
  const Eigen::Index n = features.rows();
  if (n < 5) throw InvalidInput("t-SNE needs at least 5 points");
  if (!features.allFinite()) throw InvalidInput("t-SNE features are not finite");
  if (!(config.perplexity > 0) || config.iterations < 0) {
    throw InvalidInput("t-SNE perplexity must be > 0 and iterations >= 0");
  }
  if (!(config.early_exaggeration > 0)) throw InvalidInput("t-SNE early exaggeration must be > 0");
  double perplexity = config.perplexity;
  if (static_cast<double>(n) < 3.0 * perplexity) {
    perplexity = static_cast<double>(n - 1) / 3.0;
    spdlog::info("t-SNE: perplexity lowered from {} to {} for n = {}",
                 config.perplexity, perplexity, n);
  }

  const Affinities aff = calibrate_affinities(
      squared_distances(features), perplexity, config.entropy_tolerance,
      config.calibration_iterations);
  Eigen::MatrixXd p = (aff.conditional + aff.conditional.transpose()) /
                      (2.0 * static_cast<double>(n));
  p = p.cwiseMax(1e-12);
  p.diagonal().setZero();

  std::mt19937_64 rng(config.seed);
  std::normal_distribution<double> normal(0.0, 1e-4);
  Eigen::MatrixXd y(n, 2);
  for (Eigen::Index i = 0; i < n; ++i) {
    y(i, 0) = normal(rng);
    y(i, 1) = normal(rng);
  }

  const double learning_rate =
      config.learning_rate > 0.0
          ? config.learning_rate
          : std::max(static_cast<double>(n) / (4.0 * config.early_exaggeration), 50.0);

  Embedding2D out;
  out.seed = config.seed;
  out.perplexity = perplexity;
  out.kl_initial = tsne_kl(p, y);

  Eigen::MatrixXd update = Eigen::MatrixXd::Zero(n, 2);
  Eigen::MatrixXd gains = Eigen::MatrixXd::Ones(n, 2);
  Eigen::MatrixXd num(n, n);
  Eigen::MatrixXd grad(n, 2);
  for (int iter = 0; iter < config.iterations; ++iter) {
    const double exaggeration =
        iter < config.exaggeration_iterations ? config.early_exaggeration : 1.0;
    const double momentum =
        iter < config.momentum_switch ? config.initial_momentum : config.final_momentum;

    double z = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      num(i, i) = 0.0;
      for (Eigen::Index j = i + 1; j < n; ++j) {
        const double v = 1.0 / (1.0 + (y.row(i) - y.row(j)).squaredNorm());
        num(i, j) = v;
        num(j, i) = v;
        z += 2.0 * v;
      }
    }
    grad.setZero();
    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index j = 0; j < n; ++j) {
        if (i == j) continue;
        const double mult = (exaggeration * p(i, j) - num(i, j) / z) * num(i, j);
        grad.row(i) += 4.0 * mult * (y.row(i) - y.row(j));
      }
    }
    for (Eigen::Index i = 0; i < n; ++i) {
      for (int k = 0; k < 2; ++k) {
        const bool same_sign = (grad(i, k) > 0) == (update(i, k) > 0);
        gains(i, k) = same_sign ? gains(i, k) * 0.8 : gains(i, k) + 0.2;
        gains(i, k) = std::max(gains(i, k), 0.01);
        update(i, k) = momentum * update(i, k) -
                       learning_rate * gains(i, k) * grad(i, k);
      }
    }
    y += update;
    y.rowwise() -= y.colwise().mean();
  }

  if (!y.allFinite()) throw NumericalFailure("t-SNE embedding became non-finite");
  out.points = y;
  out.kl_final = tsne_kl(p, y);
  out.kl_decreased = out.kl_final < out.kl_initial;
  if (!out.kl_decreased) {
    spdlog::warn("NumericalWarning: t-SNE KL did not decrease ({} -> {})",
                 out.kl_initial, out.kl_final);
  }
  return out;
}

}  // namespace latentatlas
