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
#include "latentatlas/gen_core.hpp"
#include "support/oracles.hpp"

using namespace latentatlas;

namespace {

GeneratorShape tiny_shape() { return {8, 4, 2}; }

LatentCode w_code(Eigen::VectorXd v) { return {std::move(v), LatentSpace::kW}; }

}  // namespace

TEST_SUITE("gen_core") {

TEST_CASE("truncation endpoints and linearity") {
  const StyleWeights w = random_weights(tiny_shape(), 11);
  const LatentCode z = sample_z(8, 3);
  const LatentCode full = map_latent(z, w, 1.0);
  CHECK(full.space == LatentSpace::kW);
  const LatentCode collapsed = map_latent(z, w, 0.0);
  CHECK(collapsed.values == w.w_mean.cast<double>());
  for (double psi : {0.25, 0.5, 0.9}) {
    const Eigen::VectorXd mean = w.w_mean.cast<double>();
    const Eigen::VectorXd expect = mean + psi * (full.values - mean);
    CHECK((map_latent(z, w, psi).values - expect).norm() < 1e-12);
  }
}

TEST_CASE("mapping network matches a hand-evaluated chain") {
  // Layer 0 scales the first coordinate by 2, the other seven are identity
  // with zero bias. Each layer applies leaky-ReLU(0.2) then gain sqrt(2):
  // positive inputs grow by sqrt(2)^8 = 16, negative ones by (0.2*sqrt(2))^8.
  StyleWeights w = zero_weights({4, 2, 1});
  for (int l = 0; l < kMappingLayers; ++l) w.mapping[static_cast<std::size_t>(l)].weight.setIdentity();
  w.mapping[0].weight(0, 0) = 2.0f;
  Eigen::VectorXd z(4);
  z << 1.0, 0.0, -1.0, 0.5;
  const Eigen::VectorXd out = map_latent({z, LatentSpace::kZ}, w, 1.0).values;
  const double neg = std::pow(0.2 * std::sqrt(2.0), 8);
  CHECK(out[0] == doctest::Approx(32.0).epsilon(1e-12));
  CHECK(out[1] == 0.0);
  CHECK(out[2] == doctest::Approx(-neg).epsilon(1e-12));
  CHECK(out[3] == doctest::Approx(8.0).epsilon(1e-12));
}

TEST_CASE("map_latent rejects bad inputs") {
  const StyleWeights w = random_weights(tiny_shape(), 1);
  CHECK_THROWS_AS(map_latent(sample_z(7, 0), w), InvalidDimension);
  CHECK_THROWS_AS(map_latent(sample_z(8, 0), w, 1.5), InvalidInput);
  CHECK_THROWS_AS(map_latent(w_code(Eigen::VectorXd::Zero(8)), w), InvalidInput);
}

TEST_CASE("style_from_w is the layer affine map") {
  StyleWeights w = zero_weights({4, 2, 2});
  w.affine[0].weight.setIdentity();
  const Eigen::VectorXd v = Eigen::VectorXd::LinSpaced(4, -1.0, 2.0);
  CHECK(style_from_w(w_code(v), 0, w).values == v);

  w.affine[1].bias = Eigen::VectorXf::LinSpaced(4, 1.0f, 4.0f);
  CHECK(style_from_w(w_code(Eigen::VectorXd::Zero(4)), 1, w).values == w.affine[1].bias.cast<double>());
  CHECK_THROWS_AS(style_from_w(w_code(v), 2, w), InvalidLayer);

  // Naive dot-product oracle.
  std::mt19937_64 rng(5);
  const Eigen::MatrixXd a = latentatlas::testing::random_matrix(4, 4, rng);
  w.affine[0].weight = a.cast<float>();
  w.affine[0].bias.setZero();
  const Eigen::VectorXd y = style_from_w(w_code(v), 0, w).values;
  for (int i = 0; i < 4; ++i) {
    double dot = 0.0;
    for (int j = 0; j < 4; ++j) dot += static_cast<double>(static_cast<float>(a(i, j))) * v[j];
    CHECK(y[i] == doctest::Approx(dot).epsilon(1e-12));
  }
}

TEST_CASE("style_from_w is affine in w") {
  const StyleWeights w = random_weights(tiny_shape(), 4);
  std::mt19937_64 rng(6);
  const Eigen::VectorXd w1 = latentatlas::testing::random_matrix(8, 1, rng);
  const Eigen::VectorXd w2 = latentatlas::testing::random_matrix(8, 1, rng);
  const double a = 0.3;
  const Eigen::VectorXd lhs = style_from_w(w_code(a * w1 + (1 - a) * w2), 1, w).values;
  const Eigen::VectorXd rhs = a * style_from_w(w_code(w1), 1, w).values +
                              (1 - a) * style_from_w(w_code(w2), 1, w).values;
  CHECK((lhs - rhs).norm() <= 1e-10 * rhs.norm());
}

TEST_CASE("adain sets per-channel moments") {
  std::mt19937_64 rng(7);
  const Eigen::MatrixXd x = latentatlas::testing::random_matrix(2, 16, rng);
  StyleVector style{Eigen::Vector4d(2.0, 3.0, -1.0, 5.0)};
  const Eigen::MatrixXd out = adain(x, style);
  for (int c = 0; c < 2; ++c) {
    const double mean = out.row(c).mean();
    const double var = (out.row(c).array() - mean).square().mean();
    CHECK(mean == doctest::Approx(style.values[2 + c]).epsilon(1e-5));
    CHECK(std::sqrt(var) == doctest::Approx(std::abs(style.values[c])).epsilon(1e-5));
  }
  // scale 1 / shift 0 standardizes; scale 0 gives the shift everywhere.
  const Eigen::MatrixXd standard = adain(x, {Eigen::Vector4d(1, 1, 0, 0)});
  CHECK(std::abs(standard.row(0).mean()) < 1e-12);
  const Eigen::MatrixXd flat = adain(x, {Eigen::Vector4d(0, 0, 7, -2)});
  CHECK((flat.row(0).array() == 7.0).all());
  CHECK((flat.row(1).array() == -2.0).all());
  CHECK_THROWS_AS(adain(x, {Eigen::VectorXd::Zero(6)}), InvalidDimension);
}

TEST_CASE("adain moment invariant at small variance") {
  std::mt19937_64 rng(8);
  const Eigen::MatrixXd x = 1e-3 * latentatlas::testing::random_matrix(1, 64, rng);
  REQUIRE((x.array() - x.mean()).square().mean() > 1e-6 * 0.5);
  const Eigen::MatrixXd out = adain(x, {Eigen::Vector2d(4.0, 1.0)});
  const double mean = out.mean();
  CHECK(mean == doctest::Approx(1.0).epsilon(1e-5));
  CHECK(std::sqrt((out.array() - mean).square().mean()) == doctest::Approx(4.0).epsilon(1e-5));
}

TEST_CASE("synthesize with zero convolutions yields the toRGB bias colour") {
  StyleWeights w = zero_weights({4, 2, 3});
  w.to_rgb_bias << 0.2f, -0.6f, 3.0f;
  const GeneratedImage img = synthesize(w_code(Eigen::VectorXd::Ones(4)), w, 9);
  CHECK(img.image.height == 16);
  CHECK(img.image.width == 16);
  for (int p = 0; p < img.image.pixel_count(); ++p) {
    CHECK(img.image.pixels(0, p) == doctest::Approx(0.6));
    CHECK(img.image.pixels(1, p) == doctest::Approx(0.2));
    CHECK(img.image.pixels(2, p) == 1.0);
  }
}

TEST_CASE("synthesize is deterministic and sized 4*2^(L-1)") {
  StyleWeights w = random_weights(tiny_shape(), 2);
  for (float& s : w.noise_scale) s = 0.3f;  // noise scales start at zero
  const LatentCode code = map_latent(sample_z(8, 1), w);
  const GeneratedImage a = synthesize(code, w, 5);
  const GeneratedImage b = synthesize(code, w, 5);
  CHECK(a.image == b.image);
  CHECK(a.image.to_rgb8() == b.image.to_rgb8());
  CHECK(a.image.height == 8);
  CHECK((a.image.pixels.array() >= 0.0).all());
  CHECK((a.image.pixels.array() <= 1.0).all());
  CHECK_FALSE(synthesize(code, w, 6).image == a.image);
  CHECK(synthesize(code, w, kZeroNoise).image == synthesize(code, w, kZeroNoise).image);

  for (int blocks : {3, 4}) {
    const StyleWeights big = random_weights({8, 4, blocks}, 3);
    const int side = synthesize(map_latent(sample_z(8, 0), big), big, kZeroNoise).image.width;
    CHECK(side == 4 * (1 << (blocks - 1)));
  }
}

TEST_CASE("weights validate their shape") {
  StyleWeights w = random_weights(tiny_shape(), 1);
  CHECK_NOTHROW(w.validate());
  w.conv.pop_back();
  CHECK_THROWS_AS(w.validate(), InvalidDimension);
  StyleWeights bad = random_weights(tiny_shape(), 1);
  bad.to_rgb(0, 0) = std::nanf("");
  CHECK_THROWS_AS(bad.validate(), NumericalFailure);
}

TEST_CASE("compute_w_mean is deterministic per seed") {
  const StyleWeights w = random_weights(tiny_shape(), 9);
  const Eigen::VectorXd mean = compute_w_mean(w, 50, 4);
  CHECK(mean.size() == 8);
  CHECK(mean.allFinite());
  CHECK(compute_w_mean(w, 50, 4) == mean);
  // One sample draws the same z as sample_z with that seed.
  const Eigen::VectorXd single = compute_w_mean(w, 1, 4);
  CHECK((single - map_latent(sample_z(8, 4), w).values).norm() < 1e-12);
}

}  // TEST_SUITE
