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

// Style-based generator at desk scale.
//
//   z --(8-layer MLP)--> w --(per-block affine A w + b)--> style y
//   constant input -> [upsample] conv3x3 -> noise -> AdaIN(y) -> lrelu -> ...
//   -> 1x1 toRGB -> (x + 1) / 2 -> clamp [0,1]
//
// The first block runs at 4x4 without upsampling, so L blocks produce an
// image of side 4 * 2^(L-1). Style vectors hold the AdaIN scales in their
// first C entries and the shifts in the last C entries (m = 2C).

#include <Eigen/Dense>

#include <array>
#include <cstdint>
#include <optional>
#include <vector>

#include "latentatlas/autograd.hpp"
#include "latentatlas/image.hpp"

namespace latentatlas {

inline constexpr int kMappingLayers = 8;
inline constexpr double kLeakySlope = 0.2;
inline constexpr double kActivationGain = 1.4142135623730951;  // sqrt(2)
inline constexpr double kAdainEpsilon = 1e-8;
inline constexpr double kWMeanDecay = 0.995;

enum class LatentSpace { kZ, kW };

struct LatentCode {
  Eigen::VectorXd values;
  LatentSpace space = LatentSpace::kZ;

  int dim() const { return static_cast<int>(values.size()); }
};

struct StyleVector {
  Eigen::VectorXd values;
};

struct GeneratorShape {
  int latent_dim = 512;  // d
  int channels = 64;     // C
  int blocks = 3;        // L

  int style_dim() const { return 2 * channels; }  // m
  int resolution() const { return 4 << (blocks - 1); }
  int block_resolution(int block) const { return 4 << block; }

  bool operator==(const GeneratorShape&) const = default;
};

struct DenseLayer {
  Eigen::MatrixXf weight;  // out x in
  Eigen::VectorXf bias;

  bool operator==(const DenseLayer& o) const {
    return weight == o.weight && bias == o.bias;
  }
};

/// All generator parameters, stored at the on-disk float32 precision so that
/// save/load round-trips exactly. Computation promotes to double.
struct StyleWeights {
  GeneratorShape shape;
  std::array<DenseLayer, kMappingLayers> mapping;  // d x d each
  std::vector<DenseLayer> affine;                  // m x d, one per block
  std::vector<Eigen::MatrixXf> conv;  // C x 9C: (out, in*9 + ky*3 + kx)
  std::vector<float> noise_scale;     // one per block
  Eigen::MatrixXf to_rgb;             // 3 x C
  Eigen::VectorXf to_rgb_bias;        // 3
  Eigen::MatrixXf constant_input;     // C x 16, pixel index y*4 + x
  Eigen::VectorXf w_mean;             // d

  /// Throws InvalidDimension / NumericalFailure when shapes disagree with
  /// `shape` or any value is non-finite.
  void validate() const;

  bool operator==(const StyleWeights&) const = default;
};

/// Zero-initialised weights of the given shape.
StyleWeights zero_weights(const GeneratorShape& shape);
/// Fan-in scaled Gaussian initialisation. Affine biases start at
/// (scale = 1, shift = 0); noise scales at zero.
StyleWeights random_weights(const GeneratorShape& shape, std::uint64_t seed);

/// std::nullopt means all injected noise is zero.
using NoiseSeed = std::optional<std::uint64_t>;
inline constexpr NoiseSeed kZeroNoise = std::nullopt;

struct GeneratedImage {
  Image image;
  Provenance provenance = Provenance::kGenerated;
  std::optional<LatentCode> source_w;
  std::optional<int> direction_id;
  std::optional<double> alpha;
};

/// Maps z to W and applies truncation toward `weights.w_mean` with `psi`.
LatentCode map_latent(const LatentCode& z, const StyleWeights& weights,
                      double psi = 1.0);

/// y = A w + b for the given synthesis block.
StyleVector style_from_w(const LatentCode& w, int layer,
                         const StyleWeights& weights);

/// Instance-normalises each channel (row) of `activations` and applies the
/// scale/shift halves of `style`.
Eigen::MatrixXd adain(const Eigen::MatrixXd& activations,
                      const StyleVector& style);

GeneratedImage synthesize(const LatentCode& w, const StyleWeights& weights,
                          NoiseSeed noise_seed);

/// Mean of mapped w over `samples` standard-normal z.
Eigen::VectorXd compute_w_mean(const StyleWeights& weights, int samples,
                               std::uint64_t seed);

LatentCode sample_z(int dim, std::uint64_t seed);

// ---------------------------------------------------------------------------
// Differentiable forward path, shared by inference and the trainer.

/// Double-precision copy of StyleWeights used as trainable master parameters.
struct GeneratorParams {
  GeneratorShape shape;
  std::array<Eigen::MatrixXd, kMappingLayers> mapping_weight;
  std::array<Eigen::MatrixXd, kMappingLayers> mapping_bias;  // d x 1
  std::vector<Eigen::MatrixXd> affine_weight;
  std::vector<Eigen::MatrixXd> affine_bias;  // m x 1
  std::vector<Eigen::MatrixXd> conv;
  std::vector<Eigen::MatrixXd> noise_scale;  // 1 x 1
  Eigen::MatrixXd to_rgb;
  Eigen::MatrixXd to_rgb_bias;  // 3 x 1
  Eigen::MatrixXd constant_input;
  Eigen::VectorXd w_mean;

  static GeneratorParams from_weights(const StyleWeights& weights);
  /// Rounds to float32.
  StyleWeights to_weights() const;

  // Parameter groups in a fixed order (the optimizer uses separate learning
  // rates for the mapping network).
  std::vector<Eigen::MatrixXd*> mapping_tensors();
  std::vector<Eigen::MatrixXd*> synthesis_tensors();
  std::vector<const Eigen::MatrixXd*> all_tensors() const;
};

struct GeneratorVars {
  std::array<ag::Var, kMappingLayers> mapping_weight;
  std::array<ag::Var, kMappingLayers> mapping_bias;
  std::vector<ag::Var> affine_weight;
  std::vector<ag::Var> affine_bias;
  std::vector<ag::Var> conv;
  std::vector<ag::Var> noise_scale;
  ag::Var to_rgb;
  ag::Var to_rgb_bias;
  ag::Var constant_input;
  GeneratorShape shape;

  static GeneratorVars make(const GeneratorParams& params, bool requires_grad);
  std::vector<ag::Var> mapping_vars() const;
  std::vector<ag::Var> synthesis_vars() const;
};

/// One 1 x (side*side) standard-normal map per block.
using NoiseMaps = std::vector<Eigen::MatrixXd>;
NoiseMaps make_noise(const GeneratorShape& shape, NoiseSeed seed);

ag::Var mapping_forward(const GeneratorVars& g, const ag::Var& z);
ag::Var style_forward(const GeneratorVars& g, const ag::Var& w, int layer);
ag::Var adain_forward(const ag::Var& x, const ag::Var& style);
/// Raw toRGB output (3 x pixels), nominally in [-1,1].
ag::Var synthesis_forward(const GeneratorVars& g, const ag::Var& w,
                          const NoiseMaps& noise);
/// Affine rescale (x + 1) / 2 and clamp to [0,1].
Image raw_to_image(const Eigen::MatrixXd& raw, int side);

}  // namespace latentatlas
