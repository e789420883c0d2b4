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

namespace latentatlas {

struct SymmetricEigen {
  Eigen::VectorXd values;   // descending
  Eigen::MatrixXd vectors;  // column i pairs with values[i]
  int sweeps = 0;
};

/// Cyclic Jacobi eigendecomposition of a symmetric matrix. Iterates until the
/// off-diagonal Frobenius norm is at most `tolerance` times the matrix
/// Frobenius norm; throws NumericalFailure after `max_sweeps`.
SymmetricEigen jacobi_eigen(const Eigen::MatrixXd& symmetric,
                            double tolerance = 1e-12, int max_sweeps = 100);

}  // namespace latentatlas
