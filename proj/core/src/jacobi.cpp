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

#include "latentatlas/jacobi.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "latentatlas/errors.hpp"

namespace latentatlas {
namespace {

double off_diagonal_norm(const Eigen::MatrixXd& a) {
  double sum = 0.0;
  for (Eigen::Index q = 0; q < a.cols(); ++q) {
    for (Eigen::Index p = 0; p < a.rows(); ++p) {
      if (p != q) sum += a(p, q) * a(p, q);
    }
  }
  return std::sqrt(sum);
}

}  // namespace

SymmetricEigen jacobi_eigen(const Eigen::MatrixXd& symmetric, double tolerance,
                            int max_sweeps) {
  if (symmetric.rows() != symmetric.cols()) {
    throw InvalidDimension("jacobi_eigen: matrix is not square");
  }
  if (!symmetric.allFinite()) throw InvalidInput("jacobi_eigen: non-finite input");
  const Eigen::Index n = symmetric.rows();
  Eigen::MatrixXd a = 0.5 * (symmetric + symmetric.transpose());
  Eigen::MatrixXd v = Eigen::MatrixXd::Identity(n, n);
  const double scale = a.norm();

  SymmetricEigen out;
  while (off_diagonal_norm(a) > tolerance * scale) {
    if (out.sweeps == max_sweeps) {
      throw NumericalFailure("Jacobi eigensolver did not converge in " +
                             std::to_string(max_sweeps) + " sweeps");
    }
    ++out.sweeps;
    for (Eigen::Index p = 0; p < n - 1; ++p) {
      for (Eigen::Index q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (apq == 0.0) continue;
        // Rotation that annihilates a(p, q) (Golub & Van Loan, symmetric Schur).
        const double tau = (a(q, q) - a(p, p)) / (2.0 * apq);
        const double t = (tau >= 0 ? 1.0 : -1.0) /
                         (std::abs(tau) + std::sqrt(1.0 + tau * tau));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = t * c;
        for (Eigen::Index k = 0; k < n; ++k) {
          const double akp = a(k, p), akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (Eigen::Index k = 0; k < n; ++k) {
          const double apk = a(p, k), aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
        a(p, q) = 0.0;
        a(q, p) = 0.0;
        for (Eigen::Index k = 0; k < n; ++k) {
          const double vkp = v(k, p), vkq = v(k, q);
          v(k, p) = c * vkp - s * vkq;
          v(k, q) = s * vkp + c * vkq;
        }
      }
    }
  }

  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&a](Eigen::Index i, Eigen::Index j) {
    return a(i, i) > a(j, j);
  });
  out.values.resize(n);
  out.vectors.resize(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    out.values[i] = a(order[i], order[i]);
    out.vectors.col(i) = v.col(order[i]);
  }
  return out;
}

}  // namespace latentatlas
