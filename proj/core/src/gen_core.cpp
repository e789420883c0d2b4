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

#include "latentatlas/gen_core.hpp"

#include <cmath>
#include <random>
#include <string>

#include "latentatlas/errors.hpp"

namespace latentatlas {
namespace {

using ag::Var;

template <typename Derived>
void require_finite(const Eigen::DenseBase<Derived>& m, const char* what) {
  if (!m.allFinite()) {
    throw NumericalFailure(std::string("non-finite values in ") + what);
  }
}

void require_shape(const Eigen::MatrixXf& m, Eigen::Index rows,
                   Eigen::Index cols, const char* what) {
  if (m.rows() != rows || m.cols() != cols) {
    throw InvalidDimension(std::string(what) + ": expected " +
                           std::to_string(rows) + "x" + std::to_string(cols) +
                           ", got " + std::to_string(m.rows()) + "x" +
                           std::to_string(m.cols()));
  }
  require_finite(m, what);
}

void require_size(const Eigen::VectorXf& v, Eigen::Index size,
                  const char* what) {
  if (v.size() != size) {
    throw InvalidDimension(std::string(what) + ": expected length " +
                           std::to_string(size) + ", got " +
                           std::to_string(v.size()));
  }
  require_finite(v, what);
}

void require_w(const LatentCode& w, const GeneratorShape& shape) {
  if (w.space != LatentSpace::kW) {
    throw InvalidInput("expected a latent code in W space");
  }
  if (w.dim() != shape.latent_dim) {
    throw InvalidDimension("latent code has dimension " +
                           std::to_string(w.dim()) + ", generator expects " +
                           std::to_string(shape.latent_dim));
  }
  if (!w.values.allFinite()) throw InvalidInput("latent code is not finite");
}

Eigen::MatrixXf gaussian(Eigen::Index rows, Eigen::Index cols, double stddev,
                         std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, stddev);
  Eigen::MatrixXf m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (Eigen::Index c = 0; c < cols; ++c) {
      m(r, c) = static_cast<float>(normal(rng));
    }
  }
  return m;
}

}  // namespace

void StyleWeights::validate() const {
  const int d = shape.latent_dim;
  const int c = shape.channels;
  const int m = shape.style_dim();
  if (d < 1 || c < 1 || shape.blocks < 1 || shape.blocks > 8) {
    throw InvalidDimension("generator shape out of range");
  }
  for (const DenseLayer& layer : mapping) {
    require_shape(layer.weight, d, d, "mapping weight");
    require_size(layer.bias, d, "mapping bias");
  }
  const auto blocks = static_cast<std::size_t>(shape.blocks);
  if (affine.size() != blocks || conv.size() != blocks ||
      noise_scale.size() != blocks) {
    throw InvalidDimension("per-block tensor count does not match L");
  }
  for (std::size_t i = 0; i < blocks; ++i) {
    require_shape(affine[i].weight, m, d, "affine weight");
    require_size(affine[i].bias, m, "affine bias");
    require_shape(conv[i], c, 9 * c, "conv kernel");
    if (!std::isfinite(noise_scale[i])) {
      throw NumericalFailure("non-finite noise scale");
    }
  }
  require_shape(to_rgb, 3, c, "toRGB weight");
  require_size(to_rgb_bias, 3, "toRGB bias");
  require_shape(constant_input, c, 16, "constant input");
  require_size(w_mean, d, "w_mean");
}

StyleWeights zero_weights(const GeneratorShape& shape) {
  const int d = shape.latent_dim;
  const int c = shape.channels;
  const int m = shape.style_dim();
  StyleWeights w;
  w.shape = shape;
  for (DenseLayer& layer : w.mapping) {
    layer.weight = Eigen::MatrixXf::Zero(d, d);
    layer.bias = Eigen::VectorXf::Zero(d);
  }
  for (int i = 0; i < shape.blocks; ++i) {
    w.affine.push_back({Eigen::MatrixXf::Zero(m, d), Eigen::VectorXf::Zero(m)});
    w.conv.push_back(Eigen::MatrixXf::Zero(c, 9 * c));
    w.noise_scale.push_back(0.0f);
  }
  w.to_rgb = Eigen::MatrixXf::Zero(3, c);
  w.to_rgb_bias = Eigen::VectorXf::Zero(3);
  w.constant_input = Eigen::MatrixXf::Zero(c, 16);
  w.w_mean = Eigen::VectorXf::Zero(d);
  return w;
}

StyleWeights random_weights(const GeneratorShape& shape, std::uint64_t seed) {
  StyleWeights w = zero_weights(shape);
  std::mt19937_64 rng(seed);
  const int d = shape.latent_dim;
  const int c = shape.channels;
  for (DenseLayer& layer : w.mapping) {
    layer.weight = gaussian(d, d, 1.0 / std::sqrt(d), rng);
  }
  for (int i = 0; i < shape.blocks; ++i) {
    w.affine[i].weight = gaussian(2 * c, d, 1.0 / std::sqrt(d), rng);
    w.affine[i].bias.head(c).setOnes();
    w.conv[i] = gaussian(c, 9 * c, 1.0 / std::sqrt(9.0 * c), rng);
  }
  w.to_rgb = gaussian(3, c, 1.0 / std::sqrt(c), rng);
  w.constant_input = gaussian(c, 16, 1.0, rng);
  return w;
}

// --- GeneratorParams / GeneratorVars --------------------------------------

GeneratorParams GeneratorParams::from_weights(const StyleWeights& weights) {
  weights.validate();
  GeneratorParams p;
  p.shape = weights.shape;
  for (int i = 0; i < kMappingLayers; ++i) {
    p.mapping_weight[i] = weights.mapping[i].weight.cast<double>();
    p.mapping_bias[i] = weights.mapping[i].bias.cast<double>();
  }
  for (int i = 0; i < weights.shape.blocks; ++i) {
    p.affine_weight.push_back(weights.affine[i].weight.cast<double>());
    p.affine_bias.push_back(weights.affine[i].bias.cast<double>());
    p.conv.push_back(weights.conv[i].cast<double>());
    p.noise_scale.push_back(Eigen::MatrixXd::Constant(1, 1, weights.noise_scale[i]));
  }
  p.to_rgb = weights.to_rgb.cast<double>();
  p.to_rgb_bias = weights.to_rgb_bias.cast<double>();
  p.constant_input = weights.constant_input.cast<double>();
  p.w_mean = weights.w_mean.cast<double>();
  return p;
}

StyleWeights GeneratorParams::to_weights() const {
  StyleWeights w;
  w.shape = shape;
  for (int i = 0; i < kMappingLayers; ++i) {
    w.mapping[i].weight = mapping_weight[i].cast<float>();
    w.mapping[i].bias = mapping_bias[i].col(0).cast<float>();
  }
  for (int i = 0; i < shape.blocks; ++i) {
    w.affine.push_back({affine_weight[i].cast<float>(),
                        affine_bias[i].col(0).cast<float>()});
    w.conv.push_back(conv[i].cast<float>());
    w.noise_scale.push_back(static_cast<float>(noise_scale[i](0, 0)));
  }
  w.to_rgb = to_rgb.cast<float>();
  w.to_rgb_bias = to_rgb_bias.col(0).cast<float>();
  w.constant_input = constant_input.cast<float>();
  w.w_mean = w_mean.cast<float>();
  return w;
}

std::vector<Eigen::MatrixXd*> GeneratorParams::mapping_tensors() {
  std::vector<Eigen::MatrixXd*> out;
  for (int i = 0; i < kMappingLayers; ++i) {
    out.push_back(&mapping_weight[i]);
    out.push_back(&mapping_bias[i]);
  }
  return out;
}

std::vector<Eigen::MatrixXd*> GeneratorParams::synthesis_tensors() {
  std::vector<Eigen::MatrixXd*> out;
  for (int i = 0; i < shape.blocks; ++i) {
    out.push_back(&affine_weight[i]);
    out.push_back(&affine_bias[i]);
    out.push_back(&conv[i]);
    out.push_back(&noise_scale[i]);
  }
  out.push_back(&to_rgb);
  out.push_back(&to_rgb_bias);
  out.push_back(&constant_input);
  return out;
}

std::vector<const Eigen::MatrixXd*> GeneratorParams::all_tensors() const {
  auto& self = const_cast<GeneratorParams&>(*this);
  std::vector<const Eigen::MatrixXd*> out;
  for (auto* t : self.mapping_tensors()) out.push_back(t);
  for (auto* t : self.synthesis_tensors()) out.push_back(t);
  return out;
}

GeneratorVars GeneratorVars::make(const GeneratorParams& p,
                                  bool requires_grad) {
  GeneratorVars g;
  g.shape = p.shape;
  auto v = [requires_grad](const Eigen::MatrixXd& m) {
    return Var(m, requires_grad);
  };
  for (int i = 0; i < kMappingLayers; ++i) {
    g.mapping_weight[i] = v(p.mapping_weight[i]);
    g.mapping_bias[i] = v(p.mapping_bias[i]);
  }
  for (int i = 0; i < p.shape.blocks; ++i) {
    g.affine_weight.push_back(v(p.affine_weight[i]));
    g.affine_bias.push_back(v(p.affine_bias[i]));
    g.conv.push_back(v(p.conv[i]));
    g.noise_scale.push_back(v(p.noise_scale[i]));
  }
  g.to_rgb = v(p.to_rgb);
  g.to_rgb_bias = v(p.to_rgb_bias);
  g.constant_input = v(p.constant_input);
  return g;
}

std::vector<Var> GeneratorVars::mapping_vars() const {
  std::vector<Var> out;
  for (int i = 0; i < kMappingLayers; ++i) {
    out.push_back(mapping_weight[i]);
    out.push_back(mapping_bias[i]);
  }
  return out;
}

std::vector<Var> GeneratorVars::synthesis_vars() const {
  std::vector<Var> out;
  for (int i = 0; i < shape.blocks; ++i) {
    out.push_back(affine_weight[i]);
    out.push_back(affine_bias[i]);
    out.push_back(conv[i]);
    out.push_back(noise_scale[i]);
  }
  out.push_back(to_rgb);
  out.push_back(to_rgb_bias);
  out.push_back(constant_input);
  return out;
}

NoiseMaps make_noise(const GeneratorShape& shape, NoiseSeed seed) {
  NoiseMaps maps;
  std::mt19937_64 rng(seed.value_or(0));
  std::normal_distribution<double> normal;
  for (int i = 0; i < shape.blocks; ++i) {
    const int side = shape.block_resolution(i);
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(1, side * side);
    if (seed) {
      for (Eigen::Index p = 0; p < m.cols(); ++p) m(0, p) = normal(rng);
    }
    maps.push_back(std::move(m));
  }
  return maps;
}

// --- forward path ---------------------------------------------------------

Var mapping_forward(const GeneratorVars& g, const Var& z) {
  Var h = z;
  for (int i = 0; i < kMappingLayers; ++i) {
    h = ag::add(ag::matmul(g.mapping_weight[i], h), g.mapping_bias[i]);
    h = ag::scale(ag::leaky_relu(h, kLeakySlope), kActivationGain);
  }
  return h;
}

Var style_forward(const GeneratorVars& g, const Var& w, int layer) {
  if (layer < 0 || layer >= g.shape.blocks) {
    throw InvalidLayer("synthesis layer " + std::to_string(layer) +
                       " out of range [0, " + std::to_string(g.shape.blocks) +
                       ")");
  }
  return ag::add(ag::matmul(g.affine_weight[layer], w), g.affine_bias[layer]);
}

Var adain_forward(const Var& x, const Var& style) {
  const Eigen::Index channels = x.rows();
  const Eigen::Index pixels = x.cols();
  if (style.rows() != 2 * channels || style.cols() != 1) {
    throw InvalidDimension("AdaIN style has " + std::to_string(style.rows()) +
                           " entries for " + std::to_string(channels) +
                           " channels");
  }
  const double inv_p = 1.0 / static_cast<double>(pixels);
  const Var mean = ag::scale(ag::row_sum(x), inv_p);
  const Var centered = ag::sub(x, ag::broadcast_cols(mean, pixels));
  const Var var = ag::scale(ag::row_sum(ag::mul(centered, centered)), inv_p);
  const Var inv_std = ag::pow(ag::clamp_min(var, kAdainEpsilon), -0.5);
  const Var normalized =
      ag::mul(centered, ag::broadcast_cols(inv_std, pixels));
  const Var gain = ag::slice_rows(style, 0, channels);
  const Var shift = ag::slice_rows(style, channels, channels);
  return ag::add(ag::mul(normalized, ag::broadcast_cols(gain, pixels)),
                 ag::broadcast_cols(shift, pixels));
}

Var synthesis_forward(const GeneratorVars& g, const Var& w,
                      const NoiseMaps& noise) {
  const int channels = g.shape.channels;
  Var x = g.constant_input;
  for (int block = 0; block < g.shape.blocks; ++block) {
    const int side = g.shape.block_resolution(block);
    if (block > 0) x = ag::upsample2x(x, side / 2, side / 2);
    x = ag::matmul(g.conv[block], ag::im2col3x3(x, side, side));
    const Eigen::MatrixXd n = noise.at(block).replicate(channels, 1);
    x = ag::add(x, ag::mul_scalar(ag::constant(n), g.noise_scale[block]));
    x = adain_forward(x, style_forward(g, w, block));
    x = ag::scale(ag::leaky_relu(x, kLeakySlope), kActivationGain);
  }
  return ag::add(ag::matmul(g.to_rgb, x),
                 ag::broadcast_cols(g.to_rgb_bias, x.cols()));
}

Image raw_to_image(const Eigen::MatrixXd& raw, int side) {
  Image img;
  img.height = side;
  img.width = side;
  img.pixels = ((raw.array() + 1.0) * 0.5).cwiseMax(0.0).cwiseMin(1.0);
  return img;
}

// --- public operations ----------------------------------------------------

LatentCode map_latent(const LatentCode& z, const StyleWeights& weights,
                      double psi) {
  if (z.space != LatentSpace::kZ) {
    throw InvalidInput("map_latent expects a latent code in Z space");
  }
  if (z.dim() != weights.shape.latent_dim) {
    throw InvalidDimension("z has dimension " + std::to_string(z.dim()) +
                           ", generator expects " +
                           std::to_string(weights.shape.latent_dim));
  }
  if (!(psi >= 0.0 && psi <= 1.0)) {
    throw InvalidInput("truncation psi must lie in [0, 1]");
  }
  if (!z.values.allFinite()) throw InvalidInput("z is not finite");
  ag::NoGradGuard no_grad;
  const GeneratorParams params = GeneratorParams::from_weights(weights);
  const GeneratorVars g = GeneratorVars::make(params, false);
  const Eigen::VectorXd w =
      mapping_forward(g, ag::constant(z.values)).value().col(0);
  if (psi == 1.0) return {w, LatentSpace::kW};
  return {params.w_mean + psi * (w - params.w_mean), LatentSpace::kW};
}

StyleVector style_from_w(const LatentCode& w, int layer,
                         const StyleWeights& weights) {
  if (layer < 0 || layer >= weights.shape.blocks) {
    throw InvalidLayer("synthesis layer " + std::to_string(layer) +
                       " out of range [0, " +
                       std::to_string(weights.shape.blocks) + ")");
  }
  require_w(w, weights.shape);
  const DenseLayer& a = weights.affine[layer];
  return {a.weight.cast<double>() * w.values + a.bias.cast<double>()};
}

Eigen::MatrixXd adain(const Eigen::MatrixXd& activations,
                      const StyleVector& style) {
  ag::NoGradGuard no_grad;
  return adain_forward(ag::constant(activations), ag::constant(style.values))
      .value();
}

GeneratedImage synthesize(const LatentCode& w, const StyleWeights& weights,
                          NoiseSeed noise_seed) {
  require_w(w, weights.shape);
  ag::NoGradGuard no_grad;
  const GeneratorParams params = GeneratorParams::from_weights(weights);
  const GeneratorVars g = GeneratorVars::make(params, false);
  const Var raw = synthesis_forward(g, ag::constant(w.values),
                                    make_noise(weights.shape, noise_seed));
  GeneratedImage out;
  out.image = raw_to_image(raw.value(), weights.shape.resolution());
  out.provenance = Provenance::kGenerated;
  out.source_w = w;
  return out;
}

LatentCode sample_z(int dim, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  LatentCode z{Eigen::VectorXd(dim), LatentSpace::kZ};
  for (int i = 0; i < dim; ++i) z.values[i] = normal(rng);
  return z;
}

Eigen::VectorXd compute_w_mean(const StyleWeights& weights, int samples,
                               std::uint64_t seed) {
  if (samples < 1) throw InvalidInput("compute_w_mean needs samples >= 1");
  ag::NoGradGuard no_grad;
  const GeneratorParams params = GeneratorParams::from_weights(weights);
  const GeneratorVars g = GeneratorVars::make(params, false);
  const int d = weights.shape.latent_dim;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  Eigen::MatrixXd z(d, samples);
  for (int s = 0; s < samples; ++s) {
    for (int i = 0; i < d; ++i) z(i, s) = normal(rng);
  }
  // The mapping network is column-wise, so the whole batch goes through at
  // once with the biases broadcast.
  Var h = ag::constant(z);
  for (int i = 0; i < kMappingLayers; ++i) {
    h = ag::add(ag::matmul(g.mapping_weight[i], h),
                ag::broadcast_cols(g.mapping_bias[i], samples));
    h = ag::scale(ag::leaky_relu(h, kLeakySlope), kActivationGain);
  }
  return h.value().rowwise().mean();
}

}  // namespace latentatlas
