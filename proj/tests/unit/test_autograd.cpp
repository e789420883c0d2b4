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

#include <random>

#include "latentatlas/autograd.hpp"
#include "support/oracles.hpp"

using namespace latentatlas;
using latentatlas::ag::Var;
using latentatlas::testing::finite_difference_gradient;
using latentatlas::testing::max_relative_error;
using latentatlas::testing::random_matrix;

namespace {

// Checks d(loss)/d(inputs) against central differences, where `build` maps
// the current input values to a scalar Var.
double check_op(std::vector<Eigen::MatrixXd> inputs,
                const std::function<Var(const std::vector<Var>&)>& build) {
  std::vector<Var> vars;
  for (const auto& m : inputs) vars.push_back(ag::parameter(m));
  const Var out = build(vars);
  const std::vector<Var> g = ag::grad(out, vars);
  std::vector<Eigen::MatrixXd> analytic;
  for (const Var& v : g) analytic.push_back(v.value());

  std::vector<Eigen::MatrixXd*> ptrs;
  for (auto& m : inputs) ptrs.push_back(&m);
  auto loss = [&] {
    std::vector<Var> c;
    for (const auto& m : inputs) c.push_back(ag::constant(m));
    return build(c).scalar();
  };
  return max_relative_error(analytic, finite_difference_gradient(loss, ptrs));
}

// A fixed random weighting turns any matrix output into a scalar.
Var weighted_sum(const Var& x, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  return ag::sum_all(ag::mul_const(x, random_matrix(x.rows(), x.cols(), rng)));
}

}  // namespace

TEST_SUITE("autograd") {

TEST_CASE("elementwise and matrix ops match finite differences") {
  std::mt19937_64 rng(1);
  const auto a = random_matrix(3, 4, rng), b = random_matrix(3, 4, rng), c = random_matrix(4, 2, rng);
  CHECK(check_op({a, b}, [](auto& v) { return weighted_sum(ag::mul(v[0], v[1]), 2); }) < 1e-7);
  CHECK(check_op({a, b}, [](auto& v) { return weighted_sum(ag::sub(v[0], ag::scale(v[1], 3.0)), 3); }) < 1e-7);
  CHECK(check_op({a, c}, [](auto& v) { return weighted_sum(ag::matmul(v[0], v[1]), 4); }) < 1e-7);
  CHECK(check_op({a}, [](auto& v) { return weighted_sum(ag::transpose(v[0]), 5); }) < 1e-7);
  CHECK(check_op({a}, [](auto& v) { return weighted_sum(ag::softplus(v[0]), 6); }) < 1e-7);
  CHECK(check_op({a}, [](auto& v) { return weighted_sum(ag::sigmoid(v[0]), 7); }) < 1e-7);
  CHECK(check_op({a}, [](auto& v) { return weighted_sum(ag::leaky_relu(v[0], 0.2), 8); }) < 1e-7);
  CHECK(check_op({a}, [](auto& v) { return weighted_sum(ag::row_sum(v[0]), 9); }) < 1e-7);
  CHECK(check_op({a}, [](auto& v) { return weighted_sum(ag::reshape(v[0], 2, 6), 10); }) < 1e-7);
  CHECK(check_op({a}, [](auto& v) { return weighted_sum(ag::slice_rows(v[0], 1, 2), 11); }) < 1e-7);
  CHECK(check_op({a}, [](auto& v) { return weighted_sum(ag::pad_rows(v[0], 2, 6), 12); }) < 1e-7);
  const Eigen::MatrixXd pos = a.cwiseAbs().array() + 0.5;
  CHECK(check_op({pos}, [](auto& v) { return weighted_sum(ag::pow(v[0], 0.5), 13); }) < 1e-7);
  CHECK(check_op({pos}, [](auto& v) { return weighted_sum(ag::clamp_min(v[0], 0.1), 14); }) < 1e-7);
  const Eigen::MatrixXd col = random_matrix(3, 1, rng), s = random_matrix(1, 1, rng);
  CHECK(check_op({col}, [](auto& v) { return weighted_sum(ag::broadcast_cols(v[0], 5), 15); }) < 1e-7);
  CHECK(check_op({s}, [](auto& v) { return weighted_sum(ag::broadcast_scalar(v[0], 2, 3), 16); }) < 1e-7);
  CHECK(check_op({a, s}, [](auto& v) { return weighted_sum(ag::mul_scalar(v[0], v[1]), 17); }) < 1e-7);
}

TEST_CASE("image ops match finite differences") {
  std::mt19937_64 rng(2);
  const auto x = random_matrix(2, 16, rng);   // 2 channels, 4x4
  const auto k = random_matrix(3, 18, rng);   // 3 out channels, 3x3 kernel
  CHECK(check_op({x}, [](auto& v) { return weighted_sum(ag::im2col3x3(v[0], 4, 4), 20); }) < 1e-7);
  CHECK(check_op({x, k}, [](auto& v) {
          return weighted_sum(ag::matmul(v[1], ag::im2col3x3(v[0], 4, 4)), 21);
        }) < 1e-7);
  const auto cols = random_matrix(18, 16, rng);
  CHECK(check_op({cols}, [](auto& v) { return weighted_sum(ag::col2im3x3(v[0], 2, 4, 4), 22); }) < 1e-7);
  CHECK(check_op({x}, [](auto& v) { return weighted_sum(ag::upsample2x(v[0], 4, 4), 23); }) < 1e-7);
  CHECK(check_op({x}, [](auto& v) { return weighted_sum(ag::sum_pool2x(v[0], 4, 4), 24); }) < 1e-7);
}

TEST_CASE("im2col matches a direct zero-padded convolution") {
  std::mt19937_64 rng(3);
  const auto x = random_matrix(2, 12, rng);  // 3 rows x 4 cols
  const auto k = random_matrix(1, 18, rng);
  const Eigen::MatrixXd out = (ag::matmul(ag::constant(k), ag::im2col3x3(ag::constant(x), 3, 4))).value();
  for (int y = 0; y < 3; ++y) {
    for (int xx = 0; xx < 4; ++xx) {
      double ref = 0.0;
      for (int c = 0; c < 2; ++c)
        for (int ky = 0; ky < 3; ++ky)
          for (int kx = 0; kx < 3; ++kx) {
            const int sy = y + ky - 1, sx = xx + kx - 1;
            if (sy < 0 || sy >= 3 || sx < 0 || sx >= 4) continue;
            ref += k(0, c * 9 + ky * 3 + kx) * x(c, sy * 4 + sx);
          }
      CHECK(out(0, y * 4 + xx) == doctest::Approx(ref).epsilon(1e-12));
    }
  }
}

TEST_CASE("second derivatives through create_graph") {
  // f(x) = sum(x^3); grad = 3x^2; d/dx sum(grad^2) = 36 x^3.
  const Eigen::MatrixXd x0 = (Eigen::MatrixXd(1, 3) << 0.5, -1.0, 2.0).finished();
  const Var x = ag::parameter(x0);
  const Var f = ag::sum_all(ag::mul(ag::mul(x, x), x));
  const Var g = ag::grad(f, std::span<const Var>(&x, 1), true)[0];
  const Var h = ag::grad(ag::sum_all(ag::mul(g, g)), std::span<const Var>(&x, 1))[0];
  for (int i = 0; i < 3; ++i) CHECK(h.value()(0, i) == doctest::Approx(36.0 * std::pow(x0(0, i), 3)));
}

TEST_CASE("unreached inputs get zero gradients and no-grad mode records nothing") {
  const Var a = ag::parameter(Eigen::MatrixXd::Ones(2, 2));
  const Var b = ag::parameter(Eigen::MatrixXd::Ones(3, 1));
  const Var out = ag::sum_all(a);
  const std::vector<Var> vars{a, b};
  const auto g = ag::grad(out, vars);
  CHECK(g[1].value().isZero());
  CHECK(g[1].rows() == 3);
  ag::NoGradGuard guard;
  CHECK_FALSE(ag::grad_enabled());
  CHECK_FALSE(ag::sum_all(a).requires_grad());
}

}  // TEST_SUITE
