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

#include <doctest.h>

#include <cmath>
#include <random>

#include "latentatlas/errors.hpp"
#include "latentatlas/factorization.hpp"
#include "latentatlas/jacobi.hpp"
#include "support/oracles.hpp"

using namespace latentatlas;
using latentatlas::testing::random_matrix;
using latentatlas::testing::random_orthogonal;

TEST_SUITE("factorization") {

TEST_CASE("jacobi diagonalizes symmetric matrices") {
  std::mt19937_64 rng(1);
  for (int n : {1, 2, 5, 17}) {
    const Eigen::MatrixXd b = random_matrix(n, n, rng);
    const Eigen::MatrixXd s = b + b.transpose();
    const SymmetricEigen e = jacobi_eigen(s);
    const Eigen::MatrixXd recon = e.vectors * e.values.asDiagonal() * e.vectors.transpose();
    CHECK((recon - s).norm() <= 1e-10 * std::max(1.0, s.norm()));
    CHECK((e.vectors.transpose() * e.vectors - Eigen::MatrixXd::Identity(n, n)).norm() < 1e-10);
    for (int i = 1; i < n; ++i) CHECK(e.values[i - 1] >= e.values[i]);
  }
  CHECK_THROWS_AS(jacobi_eigen(Eigen::MatrixXd::Zero(2, 3)), InvalidDimension);
  Eigen::MatrixXd bad = Eigen::MatrixXd::Identity(2, 2);
  bad(0, 1) = bad(1, 0) = std::nan("");
  CHECK_THROWS_AS(jacobi_eigen(bad), InvalidInput);
}

TEST_CASE("sefa on a diagonal affine returns the coordinate axes") {
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(4, 3);
  a(0, 0) = 1.0;
  a(1, 1) = 3.0;
  a(2, 2) = 2.0;
  const auto dirs = sefa(a, 3);
  REQUIRE(dirs.size() == 3);
  CHECK(dirs[0].eigenvalue == doctest::Approx(9.0));
  CHECK(dirs[1].eigenvalue == doctest::Approx(4.0));
  CHECK(dirs[2].eigenvalue == doctest::Approx(1.0));
  CHECK(std::abs(dirs[0].vector[1]) == doctest::Approx(1.0));
  CHECK(std::abs(dirs[1].vector[2]) == doctest::Approx(1.0));
  CHECK(std::abs(dirs[2].vector[0]) == doctest::Approx(1.0));
  for (int i = 0; i < 3; ++i) CHECK(dirs[i].rank == i);
}

TEST_CASE("sefa on the identity returns a deterministic orthonormal basis") {
  const Eigen::MatrixXd a = Eigen::MatrixXd::Identity(4, 4);
  const auto d1 = sefa(a, 4);
  const auto d2 = sefa(a, 4);
  Eigen::MatrixXd v(4, 4);
  for (int i = 0; i < 4; ++i) {
    CHECK(d1[i].eigenvalue == doctest::Approx(1.0));
    CHECK(d1[i].vector == d2[i].vector);
    v.col(i) = d1[i].vector;
  }
  CHECK((v.transpose() * v - Eigen::MatrixXd::Identity(4, 4)).norm() < 1e-12);
}

TEST_CASE("sefa agrees with an SVD oracle") {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 10; ++trial) {
    const Eigen::Index m = 4 + trial * 3, d = 3 + trial * 2;
    const Eigen::MatrixXd a = random_matrix(m, d, rng);
    const auto oracle = latentatlas::testing::svd_oracle(a);
    const int k = static_cast<int>(std::min(m, d));
    const auto dirs = sefa(a, k);
    for (int i = 0; i < k; ++i) {
      CHECK(std::abs(dirs[i].vector.dot(oracle.right.col(i))) >= 1 - 1e-10);
      CHECK(dirs[i].eigenvalue == doctest::Approx(oracle.sigma_squared[i]).epsilon(1e-8));
      // Sign convention: first non-negligible component is positive.
      for (Eigen::Index j = 0; j < d; ++j) {
        if (std::abs(dirs[i].vector[j]) > 1e-10) {
          CHECK(dirs[i].vector[j] > 0);
          break;
        }
      }
    }
  }
}

TEST_CASE("sefa is invariant to left rotations and positive scaling") {
  std::mt19937_64 rng(8);
  const Eigen::MatrixXd a = random_matrix(12, 6, rng);
  const Eigen::MatrixXd q = random_orthogonal(12, rng);
  const auto base = sefa(a, 6);
  const auto rotated = sefa(q * a, 6);
  const auto scaled = sefa(3.5 * a, 6);
  for (int i = 0; i < 6; ++i) {
    CHECK(std::abs(base[i].vector.dot(rotated[i].vector)) >= 1 - 1e-10);
    CHECK(std::abs(base[i].vector.dot(scaled[i].vector)) >= 1 - 1e-10);
    CHECK(rotated[i].eigenvalue == doctest::Approx(base[i].eigenvalue).epsilon(1e-8));
    CHECK(scaled[i].eigenvalue == doctest::Approx(3.5 * 3.5 * base[i].eigenvalue).epsilon(1e-8));
  }
}

TEST_CASE("sefa rejects bad requests") {
  const Eigen::MatrixXd a = Eigen::MatrixXd::Identity(3, 3);
  CHECK_THROWS_AS(sefa(a, 4), InvalidInput);
  CHECK_THROWS_AS(sefa(a, -1), InvalidInput);
  CHECK(sefa(a, 0).empty());
  Eigen::MatrixXd bad = a;
  bad(0, 0) = INFINITY;
  CHECK_THROWS_AS(sefa(bad, 1), InvalidInput);
}

TEST_CASE("stack_affine selects and normalizes layers") {
  const StyleWeights w = random_weights({6, 3, 3}, 2);
  const Eigen::MatrixXd all = stack_affine(w);
  CHECK(all.rows() == 3 * 6);
  CHECK(all.cols() == 6);
  for (Eigen::Index r = 0; r < all.rows(); ++r) CHECK(all.row(r).norm() == doctest::Approx(1.0));
  const std::vector<int> one{1};
  const Eigen::MatrixXd l1 = stack_affine(w, one);
  CHECK(l1 == all.middleRows(6, 6));
  const std::vector<int> bad{3};
  CHECK_THROWS_AS(stack_affine(w, bad), InvalidLayer);
  CHECK_THROWS_AS(stack_affine(w, std::vector<int>{}), InvalidInput);
}

TEST_CASE("verify_spectrum flags tampered eigenvalues") {
  std::mt19937_64 rng(4);
  const Eigen::MatrixXd a = random_matrix(8, 5, rng);
  auto dirs = sefa(a, 5);
  CHECK(verify_spectrum(a, dirs).all_ok());
  dirs[2].eigenvalue *= 1.01;
  const SpectrumReport r = verify_spectrum(a, dirs);
  CHECK_FALSE(r.all_ok());
  CHECK(r.failed_ranks() == std::vector<int>{2});
}

TEST_CASE("direction manifest round trip") {
  std::mt19937_64 rng(5);
  auto dirs = sefa(random_matrix(6, 4, rng), 3);
  dirs[0].label = "vessel density";
  dirs[0].category = Category::kVascular;
  dirs[0].pathology_relevant = true;
  dirs[1].category = Category::kDebris;
  const nlohmann::json j = directions_manifest(dirs);
  const auto parsed = parse_directions_manifest(nlohmann::json::parse(j.dump()));
  REQUIRE(parsed.size() == dirs.size());
  for (std::size_t i = 0; i < dirs.size(); ++i) {
    CHECK(parsed[i].rank == dirs[i].rank);
    CHECK(parsed[i].label == dirs[i].label);
    CHECK(parsed[i].category == dirs[i].category);
    CHECK(parsed[i].pathology_relevant == dirs[i].pathology_relevant);
    CHECK((parsed[i].vector - dirs[i].vector).norm() < 1e-15);
  }
  CHECK_THROWS_AS(parse_directions_manifest(nlohmann::json::array()), InvalidInput);
  nlohmann::json broken = j;
  broken["directions"][0]["category"] = "nonsense";
  CHECK_THROWS_AS(parse_directions_manifest(broken), InvalidInput);
  broken = j;
  broken["directions"][0]["vector"] = {1.0, 1.0, 0.0, 0.0};
  CHECK_THROWS_AS(parse_directions_manifest(broken), InvalidInput);
}

}  // TEST_SUITE
