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

// Desk-scale adversarial training of the style generator on a procedural
// dataset of filled ellipses with known generative factors.

#include <Eigen/Dense>

#include <cstdint>
#include <filesystem>
#include <functional>
#include <random>
#include <span>
#include <vector>

#include "latentatlas/autograd.hpp"
#include "latentatlas/gen_core.hpp"
#include "latentatlas/image.hpp"

namespace latentatlas {

struct TrainConfig {
  int batch_size = 8;
  double lr = 0.002;
  double beta1 = 0.0;
  double beta2 = 0.99;
  // Absolute learning rate of the mapping-network parameter group.
  double mapping_lr = 0.01;
  double adam_epsilon = 1e-8;

  double r1_gamma = 10.0;
  int r1_interval = 16;  // lazy regularization; 0 disables R1
  double pl_weight = 2.0;
  double pl_decay = 0.99;
  int pl_interval = 8;  // 0 disables the path-length penalty

  int steps = 500;
  int checkpoint_interval = 100;
  std::uint64_t seed = 0;

  GeneratorShape shape{32, 16, 2};  // 8x8 output
  int disc_channels = 16;
  int dataset_size = 256;
  int eval_size = 64;

  /// Throws InvalidInput when a field violates its range.
  void validate() const;
};

// --- procedural dataset -----------------------------------------------------

struct FactorSpec {
  double radius = 0.25;  // [0.1, 0.4], fraction of the image side
  double hue = 0.0;      // [0, 1)
  double offset_x = 0.0;  // [-0.25, 0.25], fraction of the image side
  double offset_y = 0.0;
};

struct LabeledImage {
  Image image;
  FactorSpec factors;
};

/// Filled ellipse of the factor's hue on a dark background. A pixel is
/// foreground when its centre lies inside the ellipse.
Image render_ellipse(const FactorSpec& factors, int side);

std::vector<LabeledImage> procedural_dataset(int n, std::uint64_t seed,
                                             int side = 8);

// --- discriminator ----------------------------------------------------------

/// Three 3x3 conv blocks (the first two followed by 2x2 average pooling) and
/// a dense scalar head. Inputs are 3 x pixels in [-1, 1].
struct Discriminator {
  int resolution = 8;
  int channels = 16;
  std::vector<Eigen::MatrixXd> conv_weight;  // out x 9*in
  std::vector<Eigen::MatrixXd> conv_bias;    // out x 1
  Eigen::MatrixXd dense_weight;              // 1 x features
  Eigen::MatrixXd dense_bias;                // 1 x 1

  static Discriminator random(int resolution, int channels, std::uint64_t seed);
  std::vector<Eigen::MatrixXd*> tensors();
  std::size_t parameter_count() const;
};

struct DiscriminatorVars {
  int resolution = 8;
  std::vector<ag::Var> conv_weight;
  std::vector<ag::Var> conv_bias;
  ag::Var dense_weight;
  ag::Var dense_bias;

  static DiscriminatorVars make(const Discriminator& d, bool requires_grad);
  std::vector<ag::Var> all() const;
};

ag::Var discriminator_forward(const DiscriminatorVars& d, const ag::Var& image);
/// Score of an image with pixels in [0, 1].
double discriminator_score(const Discriminator& d, const Image& image);
/// Pixels [0,1] -> [-1,1], the discriminator's input range.
Eigen::MatrixXd to_raw(const Image& image);

// --- losses -----------------------------------------------------------------

/// mean softplus(-s_real) + mean softplus(s_fake)
double d_loss_logistic(std::span<const double> real_scores,
                       std::span<const double> fake_scores);
/// mean softplus(-s_fake)
double g_loss_nonsat(std::span<const double> fake_scores);

ag::Var d_loss_logistic(std::span<const ag::Var> real_scores,
                        std::span<const ag::Var> fake_scores);
ag::Var g_loss_nonsat(std::span<const ag::Var> fake_scores);

using ScoreFn = std::function<ag::Var(const ag::Var&)>;

/// (gamma / 2) * mean_i ||d D(x_i) / d x_i||^2. Differentiable with respect
/// to whatever D closes over.
ag::Var r1_penalty(const ScoreFn& discriminator,
                   std::span<const Eigen::MatrixXd> real_batch, double gamma);
double r1_penalty(const Discriminator& d, std::span<const Image> real_batch,
                  double gamma);

struct PathLengthState {
  double target = 0.0;  // EMA of the mean Jacobian-vector norm
};

struct PathLengthResult {
  ag::Var penalty;
  PathLengthState state;
  double mean_length = 0.0;
  std::vector<double> lengths;
};

using GeneratorFn = std::function<ag::Var(const ag::Var&)>;

/// For each w_i with image direction y_i (unit Frobenius norm, same shape as
/// the generator output), J_i = d <G(w_i), y_i> sqrt(H W) / d w_i.
/// penalty = mean (||J_i|| - a)^2 with the incoming target a; the returned
/// state holds a' = decay * a + (1 - decay) * mean ||J_i||.
PathLengthResult path_length_penalty(const GeneratorFn& generator,
                                     std::span<const ag::Var> w_batch,
                                     std::span<const Eigen::MatrixXd> directions,
                                     int height, int width,
                                     PathLengthState state, double pl_decay);

Eigen::MatrixXd random_unit_direction(Eigen::Index rows, Eigen::Index cols,
                                      std::mt19937_64& rng);

// --- optimizer --------------------------------------------------------------

struct AdamConfig {
  double lr = 0.002;
  double beta1 = 0.0;
  double beta2 = 0.99;
  double epsilon = 1e-8;
};

struct AdamState {
  std::vector<Eigen::MatrixXd> first_moment;
  std::vector<Eigen::MatrixXd> second_moment;
  int step = 0;
};

/// Bias-corrected Adam update of `params` in place.
void adam_step(std::span<Eigen::MatrixXd* const> params,
               std::span<const Eigen::MatrixXd> grads, AdamState& state,
               const AdamConfig& config);

// --- objectives and training loop ------------------------------------------

/// Everything random about one optimisation step, drawn up front so the
/// objectives are deterministic functions of the parameters.
struct StepBatch {
  std::vector<Eigen::VectorXd> z;
  std::vector<NoiseMaps> noise;
  std::vector<Eigen::MatrixXd> reals;          // raw [-1,1]
  std::vector<Eigen::MatrixXd> pl_directions;  // unit norm, 3 x pixels
};

StepBatch draw_batch(const TrainConfig& config,
                     std::span<const LabeledImage> dataset,
                     std::mt19937_64& rng);

/// Logistic D loss plus, when requested, the lazily scaled R1 term
/// (r1_gamma penalty times r1_interval).
ag::Var discriminator_objective(const GeneratorVars& g,
                                const DiscriminatorVars& d,
                                const StepBatch& batch,
                                const TrainConfig& config, bool with_r1);

struct GeneratorObjective {
  ag::Var loss;
  double adversarial = 0.0;
  double path_length = 0.0;
  PathLengthState pl_state;
  std::vector<Eigen::VectorXd> mapped_w;
};

/// Non-saturating G loss plus, when requested, pl_weight * pl_interval times
/// the path-length penalty.
GeneratorObjective generator_objective(const GeneratorVars& g,
                                       const DiscriminatorVars& d,
                                       const StepBatch& batch,
                                       const TrainConfig& config, bool with_pl,
                                       PathLengthState pl_state);

struct StepLosses {
  int step = 0;
  double d_loss = 0.0;
  double g_loss = 0.0;
  double path_length = 0.0;
};

struct Checkpoint {
  int step = 0;
  StyleWeights weights;
  StepLosses losses;
};

struct TrainResult {
  std::vector<Checkpoint> checkpoints;
  std::vector<StepLosses> history;
  Discriminator discriminator;
  // Logistic D loss on a held-out batch of reals and fresh fakes.
  double initial_eval_d_loss = 0.0;
  double final_eval_d_loss = 0.0;
};

/// Held-out D loss: `eval_size` procedural images (distinct seed) against the
/// same number of generated images at psi = 1.
double evaluate_d_loss(const StyleWeights& weights, const Discriminator& d,
                       const TrainConfig& config);

/// Throws TrainingDiverged when any loss or gradient becomes non-finite.
TrainResult train(const TrainConfig& config);

/// Writes `ckpt-<step>.sgw1` and a JSON sidecar with step, losses and seed.
/// Returns the weight file path.
std::filesystem::path write_checkpoint(const Checkpoint& checkpoint,
                                       std::uint64_t seed,
                                       const std::filesystem::path& dir);

}  // namespace latentatlas
