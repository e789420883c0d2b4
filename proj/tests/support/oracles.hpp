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

// Independent oracles shared by the unit and acceptance tests. None of these
// call into the code paths they check.

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <optional>
#include <random>
#include <vector>

namespace latentatlas::testing {

/// Central finite differences of `loss` with respect to every entry of
/// `tensors`; each entry is restored after probing.
inline std::vector<Eigen::MatrixXd> finite_difference_gradient(
    const std::function<double()>& loss, const std::vector<Eigen::MatrixXd*>& tensors,
    double step = 1e-5) {
  std::vector<Eigen::MatrixXd> grads;
  for (Eigen::MatrixXd* t : tensors) {
    Eigen::MatrixXd g(t->rows(), t->cols());
    for (Eigen::Index i = 0; i < t->size(); ++i) {
      const double saved = t->data()[i];
      t->data()[i] = saved + step;
      const double up = loss();
      t->data()[i] = saved - step;
      const double down = loss();
      t->data()[i] = saved;
      g.data()[i] = (up - down) / (2.0 * step);
    }
    grads.push_back(std::move(g));
  }
  return grads;
}

/// Largest per-tensor relative error ||a - n|| / max(||a||, ||n||, floor).
inline double max_relative_error(const std::vector<Eigen::MatrixXd>& analytic,
                                 const std::vector<Eigen::MatrixXd>& numeric,
                                 double floor = 1e-7) {
  double worst = 0.0;
  for (std::size_t i = 0; i < analytic.size(); ++i) {
    const double denom = std::max({analytic[i].norm(), numeric[i].norm(), floor});
    worst = std::max(worst, (analytic[i] - numeric[i]).norm() / denom);
  }
  return worst;
}

inline Eigen::MatrixXd random_matrix(Eigen::Index rows, Eigen::Index cols, std::mt19937_64& rng,
                                     double stddev = 1.0) {
  std::normal_distribution<double> normal(0.0, stddev);
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = normal(rng);
  return m;
}

/// Haar-ish random orthogonal matrix via QR of a Gaussian matrix.
inline Eigen::MatrixXd random_orthogonal(Eigen::Index n, std::mt19937_64& rng) {
  const Eigen::HouseholderQR<Eigen::MatrixXd> qr(random_matrix(n, n, rng));
  Eigen::MatrixXd q = qr.householderQ();
  const Eigen::VectorXd signs = qr.matrixQR().diagonal().cwiseSign();
  return q * signs.asDiagonal();
}

inline Eigen::MatrixXd random_spd(Eigen::Index n, std::mt19937_64& rng) {
  const Eigen::MatrixXd b = random_matrix(n, n, rng);
  return b * b.transpose() + 0.1 * Eigen::MatrixXd::Identity(n, n);
}

/// Right singular vectors (columns, descending singular value) and squared
/// singular values of `a`, via Eigen's two-sided Jacobi SVD.
struct SvdOracle {
  Eigen::MatrixXd right;
  Eigen::VectorXd sigma_squared;
};

inline SvdOracle svd_oracle(const Eigen::MatrixXd& a) {
  const Eigen::JacobiSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeFullV);
  SvdOracle o;
  o.right = svd.matrixV();
  o.sigma_squared = Eigen::VectorXd::Zero(a.cols());
  const Eigen::VectorXd s = svd.singularValues();
  for (Eigen::Index i = 0; i < s.size(); ++i) o.sigma_squared[i] = s[i] * s[i];
  return o;
}

/// Frechet distance through the eigenvalues of the (non-symmetric) product
/// S1*S2: tr((S1^1/2 S2 S1^1/2)^1/2) = sum sqrt(lambda_i(S1 S2)).
inline double frechet_oracle(const Eigen::VectorXd& mu1, const Eigen::MatrixXd& s1,
                             const Eigen::VectorXd& mu2, const Eigen::MatrixXd& s2) {
  const Eigen::EigenSolver<Eigen::MatrixXd> es(s1 * s2);
  double cross = 0.0;
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
    cross += std::sqrt(std::max(es.eigenvalues()[i].real(), 0.0));
  }
  return (mu1 - mu2).squaredNorm() + s1.trace() + s2.trace() - 2.0 * cross;
}

/// Krippendorff's nominal alpha by explicit pair enumeration:
///   D_o = (1/n) sum_u 1/(m_u - 1) sum_{i != j in u} [v_i != v_j]
///   D_e = 1/(n(n-1)) sum over all ordered pairs of distinct pairable values [v != v']
inline double krippendorff_bruteforce(const std::vector<std::vector<std::optional<int>>>& table) {
  std::vector<std::vector<int>> units;
  for (const auto& row : table) {
    std::vector<int> v;
    for (const auto& cell : row) {
      if (cell) v.push_back(*cell);
    }
    if (v.size() >= 2) units.push_back(v);
  }
  std::vector<int> all;
  for (const auto& u : units) all.insert(all.end(), u.begin(), u.end());
  const double n = static_cast<double>(all.size());
  double observed = 0.0;
  for (const auto& u : units) {
    double disagreements = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
      for (std::size_t j = 0; j < u.size(); ++j) {
        if (i != j && u[i] != u[j]) disagreements += 1.0;
      }
    }
    observed += disagreements / static_cast<double>(u.size() - 1);
  }
  observed /= n;
  double expected = 0.0;
  for (std::size_t i = 0; i < all.size(); ++i) {
    for (std::size_t j = 0; j < all.size(); ++j) {
      if (i != j && all[i] != all[j]) expected += 1.0;
    }
  }
  expected /= n * (n - 1.0);
  return 1.0 - observed / expected;
}

}  // namespace latentatlas::testing
