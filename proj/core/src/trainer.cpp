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

#include "latentatlas/trainer.hpp"

#include <nlohmann/json.hpp>
#include <spdlog/spdlog.h>

#include <cmath>
#include <cstdio>
#include <fstream>

#include "latentatlas/errors.hpp"
#include "latentatlas/rng.hpp"
#include "latentatlas/weights_io.hpp"

namespace latentatlas {
namespace {

using ag::Var;

double softplus(double x) {
  return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x)));
}

void require_finite_scores(std::span<const double> scores) {
  for (double s : scores) {
    if (!std::isfinite(s)) throw InvalidInput("non-finite discriminator score");
  }
}

// HSV with fixed saturation/value.
Eigen::Vector3d hue_to_rgb(double hue) {
  constexpr double kSat = 0.9, kVal = 0.9;
  const double h = 6.0 * (hue - std::floor(hue));
  const int sector = static_cast<int>(h) % 6;
  const double f = h - std::floor(h);
  const double p = kVal * (1 - kSat);
  const double q = kVal * (1 - kSat * f);
  const double t = kVal * (1 - kSat * (1 - f));
  switch (sector) {
    case 0: return {kVal, t, p};
    case 1: return {q, kVal, p};
    case 2: return {p, kVal, t};
    case 3: return {p, q, kVal};
    case 4: return {t, p, kVal};
    default: return {kVal, p, q};
  }
}

constexpr double kBackground = 0.05;

Var mean_of(std::span<const Var> values) {
  Var total = values[0];
  for (std::size_t i = 1; i < values.size(); ++i) total = ag::add(total, values[i]);
  return ag::scale(total, 1.0 / static_cast<double>(values.size()));
}

void require_finite(const Var& v, const char* what, int step) {
  if (!v.value().allFinite()) throw TrainingDiverged(std::string("non-finite ") + what, step);
}

}  // namespace

void TrainConfig::validate() const {
  if (batch_size < 2) throw InvalidInput("batch_size must be >= 2");
  if (!(beta1 >= 0 && beta1 < 1) || !(beta2 >= 0 && beta2 < 1)) {
    throw InvalidInput("Adam betas must lie in [0, 1)");
  }
  if (!(lr > 0) || !(mapping_lr > 0)) throw InvalidInput("learning rates must be > 0");
  if (r1_gamma < 0 || r1_interval < 0 || pl_interval < 0 || pl_weight < 0) {
    throw InvalidInput("regularizer settings must be non-negative");
  }
  if (!(pl_decay >= 0 && pl_decay <= 1)) throw InvalidInput("pl_decay must lie in [0, 1]");
  if (steps < 0 || checkpoint_interval < 1) throw InvalidInput("bad step settings");
  if (dataset_size < 1 || eval_size < 2) throw InvalidInput("bad dataset sizes");
  if (shape.resolution() < 8) throw InvalidInput("training needs at least 8x8 output");
  if (disc_channels < 1) throw InvalidInput("disc_channels must be >= 1");
}

// --- dataset ---------------------------------------------------------------

Image render_ellipse(const FactorSpec& f, int side) {
  Image img = Image::filled(side, side, kBackground, kBackground, kBackground);
  const Eigen::Vector3d color = hue_to_rgb(f.hue);
  const double cx = (0.5 + f.offset_x) * side;
  const double cy = (0.5 + f.offset_y) * side;
  const double rx = f.radius * side;
  const double ry = f.radius * side;
  for (int y = 0; y < side; ++y) {
    for (int x = 0; x < side; ++x) {
      const double dx = (x + 0.5 - cx) / rx;
      const double dy = (y + 0.5 - cy) / ry;
      if (dx * dx + dy * dy <= 1.0) img.pixels.col(y * side + x) = color;
    }
  }
  return img;
}

std::vector<LabeledImage> procedural_dataset(int n, std::uint64_t seed,
                                             int side) {
  if (n < 1) throw InvalidInput("procedural_dataset needs n >= 1");
  if (side < 1) throw InvalidInput("image side must be >= 1");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> radius(0.1, 0.4);
  std::uniform_real_distribution<double> hue(0.0, 1.0);
  std::uniform_real_distribution<double> offset(-0.25, 0.25);
  std::vector<LabeledImage> out;
  out.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    FactorSpec f;
    f.radius = radius(rng);
    f.hue = hue(rng);
    f.offset_x = offset(rng);
    f.offset_y = offset(rng);
    out.push_back({render_ellipse(f, side), f});
  }
  return out;
}

// --- discriminator ----------------------------------------------------------

Discriminator Discriminator::random(int resolution, int channels,
                                    std::uint64_t seed) {
  if (resolution < 8 || resolution % 4 != 0) {
    throw InvalidInput("discriminator resolution must be a multiple of 4, >= 8");
  }
  Discriminator d;
  d.resolution = resolution;
  d.channels = channels;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  auto gaussian = [&](Eigen::Index r, Eigen::Index c, double stddev) {
    Eigen::MatrixXd m(r, c);
    for (Eigen::Index i = 0; i < r; ++i)
      for (Eigen::Index j = 0; j < c; ++j) m(i, j) = stddev * normal(rng);
    return m;
  };
  int in = 3;
  for (int b = 0; b < 3; ++b) {
    d.conv_weight.push_back(gaussian(channels, 9 * in, 1.0 / std::sqrt(9.0 * in)));
    d.conv_bias.push_back(Eigen::MatrixXd::Zero(channels, 1));
    in = channels;
  }
  const int side = resolution / 4;
  const int features = channels * side * side;
  // Zero head: the untrained discriminator scores every image 0 (chance level).
  d.dense_weight = Eigen::MatrixXd::Zero(1, features);
  d.dense_bias = Eigen::MatrixXd::Zero(1, 1);
  return d;
}

std::vector<Eigen::MatrixXd*> Discriminator::tensors() {
  std::vector<Eigen::MatrixXd*> out;
  for (std::size_t b = 0; b < conv_weight.size(); ++b) {
    out.push_back(&conv_weight[b]);
    out.push_back(&conv_bias[b]);
  }
  out.push_back(&dense_weight);
  out.push_back(&dense_bias);
  return out;
}

std::size_t Discriminator::parameter_count() const {
  std::size_t n = static_cast<std::size_t>(dense_weight.size() + dense_bias.size());
  for (std::size_t b = 0; b < conv_weight.size(); ++b) {
    n += static_cast<std::size_t>(conv_weight[b].size() + conv_bias[b].size());
  }
  return n;
}

DiscriminatorVars DiscriminatorVars::make(const Discriminator& d,
                                          bool requires_grad) {
  DiscriminatorVars v;
  v.resolution = d.resolution;
  for (std::size_t b = 0; b < d.conv_weight.size(); ++b) {
    v.conv_weight.emplace_back(d.conv_weight[b], requires_grad);
    v.conv_bias.emplace_back(d.conv_bias[b], requires_grad);
  }
  v.dense_weight = Var(d.dense_weight, requires_grad);
  v.dense_bias = Var(d.dense_bias, requires_grad);
  return v;
}

std::vector<Var> DiscriminatorVars::all() const {
  std::vector<Var> out;
  for (std::size_t b = 0; b < conv_weight.size(); ++b) {
    out.push_back(conv_weight[b]);
    out.push_back(conv_bias[b]);
  }
  out.push_back(dense_weight);
  out.push_back(dense_bias);
  return out;
}

Var discriminator_forward(const DiscriminatorVars& d, const Var& image) {
  int side = d.resolution;
  if (image.rows() != 3 || image.cols() != side * side) {
    throw InvalidDimension("discriminator input must be 3 x " +
                           std::to_string(side * side));
  }
  Var x = image;
  for (std::size_t b = 0; b < d.conv_weight.size(); ++b) {
    x = ag::matmul(d.conv_weight[b], ag::im2col3x3(x, side, side));
    x = ag::add(x, ag::broadcast_cols(d.conv_bias[b], x.cols()));
    x = ag::scale(ag::leaky_relu(x, kLeakySlope), kActivationGain);
    if (b + 1 < d.conv_weight.size()) {
      x = ag::scale(ag::sum_pool2x(x, side, side), 0.25);
      side /= 2;
    }
  }
  const Var flat = ag::reshape(x, x.rows() * x.cols(), 1);
  return ag::add(ag::matmul(d.dense_weight, flat), d.dense_bias);
}

Eigen::MatrixXd to_raw(const Image& image) {
  return (image.pixels.array() * 2.0 - 1.0).matrix();
}

double discriminator_score(const Discriminator& d, const Image& image) {
  ag::NoGradGuard no_grad;
  return discriminator_forward(DiscriminatorVars::make(d, false),
                               ag::constant(to_raw(image)))
      .scalar();
}

// --- losses -------------------------------------------------------------------

double d_loss_logistic(std::span<const double> real_scores,
                       std::span<const double> fake_scores) {
  if (real_scores.empty() || fake_scores.empty()) {
    throw InvalidInput("d_loss_logistic: empty batch");
  }
  require_finite_scores(real_scores);
  require_finite_scores(fake_scores);
  double real = 0.0, fake = 0.0;
  for (double s : real_scores) real += softplus(-s);
  for (double s : fake_scores) fake += softplus(s);
  return real / static_cast<double>(real_scores.size()) +
         fake / static_cast<double>(fake_scores.size());
}

double g_loss_nonsat(std::span<const double> fake_scores) {
  if (fake_scores.empty()) throw InvalidInput("g_loss_nonsat: empty batch");
  require_finite_scores(fake_scores);
  double total = 0.0;
  for (double s : fake_scores) total += softplus(-s);
  return total / static_cast<double>(fake_scores.size());
}

Var d_loss_logistic(std::span<const Var> real_scores,
                    std::span<const Var> fake_scores) {
  if (real_scores.empty() || fake_scores.empty()) {
    throw InvalidInput("d_loss_logistic: empty batch");
  }
  std::vector<Var> real, fake;
  for (const Var& s : real_scores) real.push_back(ag::softplus(ag::scale(s, -1.0)));
  for (const Var& s : fake_scores) fake.push_back(ag::softplus(s));
  return ag::add(mean_of(real), mean_of(fake));
}

Var g_loss_nonsat(std::span<const Var> fake_scores) {
  if (fake_scores.empty()) throw InvalidInput("g_loss_nonsat: empty batch");
  std::vector<Var> terms;
  for (const Var& s : fake_scores) terms.push_back(ag::softplus(ag::scale(s, -1.0)));
  return mean_of(terms);
}

Var r1_penalty(const ScoreFn& discriminator,
               std::span<const Eigen::MatrixXd> real_batch, double gamma) {
  if (gamma < 0) throw InvalidInput("r1 gamma must be >= 0");
  if (real_batch.empty()) throw InvalidInput("r1_penalty: empty batch");
  std::vector<Var> norms;
  for (const Eigen::MatrixXd& x : real_batch) {
    const Var input = ag::parameter(x);
    const Var score = discriminator(input);
    const Var g = ag::grad(score, std::span<const Var>(&input, 1),
                           /*create_graph=*/true)[0];
    norms.push_back(ag::sum_all(ag::mul(g, g)));
  }
  return ag::scale(mean_of(norms), 0.5 * gamma);
}

double r1_penalty(const Discriminator& d, std::span<const Image> real_batch,
                  double gamma) {
  const DiscriminatorVars vars = DiscriminatorVars::make(d, false);
  std::vector<Eigen::MatrixXd> raw;
  for (const Image& img : real_batch) raw.push_back(to_raw(img));
  return r1_penalty([&](const Var& x) { return discriminator_forward(vars, x); },
                    raw, gamma)
      .scalar();
}

PathLengthResult path_length_penalty(
    const GeneratorFn& generator, std::span<const Var> w_batch,
    std::span<const Eigen::MatrixXd> directions, int height, int width,
    PathLengthState state, double pl_decay) {
  if (w_batch.empty()) throw InvalidInput("path_length_penalty: empty batch");
  if (directions.size() != w_batch.size()) {
    throw InvalidInput("path_length_penalty: one direction per latent required");
  }
  if (!(state.target >= 0)) throw InvalidInput("path-length target must be >= 0");
  for (const Var& w : w_batch) {
    if (!w.requires_grad()) throw InvalidInput("path_length_penalty: latents must require grad");
  }
  const double sqrt_pixels = std::sqrt(static_cast<double>(height) * width);
  PathLengthResult result;
  std::vector<Var> sq_dev;
  double total_length = 0.0;
  for (std::size_t i = 0; i < w_batch.size(); ++i) {
    const Var image = generator(w_batch[i]);
    const Var projected =
        ag::scale(ag::sum_all(ag::mul_const(image, directions[i])), sqrt_pixels);
    const Var jac = ag::grad(projected, w_batch.subspan(i, 1),
                             /*create_graph=*/true)[0];
    const Var length = ag::pow(ag::sum_all(ag::mul(jac, jac)), 0.5);
    const Var dev = ag::add_scalar(length, -state.target);
    sq_dev.push_back(ag::mul(dev, dev));
    result.lengths.push_back(length.scalar());
    total_length += length.scalar();
  }
  result.penalty = mean_of(sq_dev);
  result.mean_length = total_length / static_cast<double>(w_batch.size());
  result.state.target =
      pl_decay * state.target + (1.0 - pl_decay) * result.mean_length;
  return result;
}

Eigen::MatrixXd random_unit_direction(Eigen::Index rows, Eigen::Index cols,
                                      std::mt19937_64& rng) {
  std::normal_distribution<double> normal;
  Eigen::MatrixXd y(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r)
    for (Eigen::Index c = 0; c < cols; ++c) y(r, c) = normal(rng);
  return y / y.norm();
}

// --- optimizer ----------------------------------------------------------------

void adam_step(std::span<Eigen::MatrixXd* const> params,
               std::span<const Eigen::MatrixXd> grads, AdamState& state,
               const AdamConfig& config) {
  if (params.size() != grads.size()) {
    throw InvalidDimension("adam_step: parameter and gradient counts differ");
  }
  if (state.first_moment.empty()) {
    for (const Eigen::MatrixXd* p : params) {
      state.first_moment.push_back(Eigen::MatrixXd::Zero(p->rows(), p->cols()));
      state.second_moment.push_back(Eigen::MatrixXd::Zero(p->rows(), p->cols()));
    }
  }
  if (state.first_moment.size() != params.size()) {
    throw InvalidDimension("adam_step: optimizer state does not match parameters");
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (params[i]->rows() != grads[i].rows() || params[i]->cols() != grads[i].cols() ||
        state.first_moment[i].rows() != grads[i].rows() ||
        state.first_moment[i].cols() != grads[i].cols()) {
      throw InvalidDimension("adam_step: shape mismatch for tensor " + std::to_string(i));
    }
  }
  ++state.step;
  const double bc1 = 1.0 - std::pow(config.beta1, state.step);
  const double bc2 = 1.0 - std::pow(config.beta2, state.step);
  for (std::size_t i = 0; i < params.size(); ++i) {
    Eigen::MatrixXd& m = state.first_moment[i];
    Eigen::MatrixXd& v = state.second_moment[i];
    const Eigen::MatrixXd& g = grads[i];
    m = config.beta1 * m + (1.0 - config.beta1) * g;
    v = config.beta2 * v + (1.0 - config.beta2) * g.cwiseProduct(g);
    const Eigen::ArrayXXd m_hat = m.array() / bc1;
    const Eigen::ArrayXXd v_hat = v.array() / bc2;
    params[i]->array() -= config.lr * m_hat / (v_hat.sqrt() + config.epsilon);
  }
}

// --- objectives -----------------------------------------------------------------

StepBatch draw_batch(const TrainConfig& config,
                     std::span<const LabeledImage> dataset,
                     std::mt19937_64& rng) {
  StepBatch b;
  std::normal_distribution<double> normal;
  std::uniform_int_distribution<std::size_t> pick(0, dataset.size() - 1);
  const int d = config.shape.latent_dim;
  const int side = config.shape.resolution();
  for (int i = 0; i < config.batch_size; ++i) {
    Eigen::VectorXd z(d);
    for (int k = 0; k < d; ++k) z[k] = normal(rng);
    b.z.push_back(std::move(z));
    b.noise.push_back(make_noise(config.shape, rng()));
    b.reals.push_back(to_raw(dataset[pick(rng)].image));
    b.pl_directions.push_back(random_unit_direction(3, side * side, rng));
  }
  return b;
}

Var discriminator_objective(const GeneratorVars& g, const DiscriminatorVars& d,
                            const StepBatch& batch, const TrainConfig& config,
                            bool with_r1) {
  std::vector<Var> real_scores, fake_scores;
  for (const Eigen::MatrixXd& x : batch.reals) {
    real_scores.push_back(discriminator_forward(d, ag::constant(x)));
  }
  for (std::size_t i = 0; i < batch.z.size(); ++i) {
    const Var w = mapping_forward(g, ag::constant(batch.z[i]));
    const Var fake = synthesis_forward(g, w, batch.noise[i]);
    fake_scores.push_back(discriminator_forward(d, fake));
  }
  Var loss = d_loss_logistic(real_scores, fake_scores);
  if (with_r1 && config.r1_gamma > 0) {
    const Var r1 = r1_penalty(
        [&d](const Var& x) { return discriminator_forward(d, x); }, batch.reals,
        config.r1_gamma);
    loss = ag::add(loss, ag::scale(r1, std::max(config.r1_interval, 1)));
  }
  return loss;
}

GeneratorObjective generator_objective(const GeneratorVars& g,
                                       const DiscriminatorVars& d,
                                       const StepBatch& batch,
                                       const TrainConfig& config, bool with_pl,
                                       PathLengthState pl_state) {
  GeneratorObjective out;
  out.pl_state = pl_state;
  std::vector<Var> ws, fake_scores;
  for (std::size_t i = 0; i < batch.z.size(); ++i) {
    Var w = mapping_forward(g, ag::constant(batch.z[i]));
    // A frozen mapping network still needs a differentiable w for the
    // path-length Jacobian.
    if (!w.requires_grad()) w = ag::parameter(w.value());
    ws.push_back(w);
    out.mapped_w.push_back(w.value().col(0));
    fake_scores.push_back(
        discriminator_forward(d, synthesis_forward(g, w, batch.noise[i])));
  }
  Var loss = g_loss_nonsat(fake_scores);
  out.adversarial = loss.scalar();
  if (with_pl && config.pl_weight > 0) {
    const int side = g.shape.resolution();
    std::size_t index = 0;
    auto generator = [&](const Var& w) {
      return synthesis_forward(g, w, batch.noise[index++]);
    };
    PathLengthResult pl = path_length_penalty(generator, ws, batch.pl_directions,
                                              side, side, pl_state,
                                              config.pl_decay);
    out.path_length = pl.penalty.scalar();
    out.pl_state = pl.state;
    loss = ag::add(loss, ag::scale(pl.penalty, config.pl_weight *
                                                   std::max(config.pl_interval, 1)));
  }
  out.loss = loss;
  return out;
}

// --- training loop ----------------------------------------------------------------

double evaluate_d_loss(const StyleWeights& weights, const Discriminator& d,
                       const TrainConfig& config) {
  const int side = weights.shape.resolution();
  const std::uint64_t eval_seed = derive_seed(config.seed, 101);
  const auto reals = procedural_dataset(config.eval_size, eval_seed, side);
  std::vector<double> real_scores, fake_scores;
  for (const LabeledImage& r : reals) real_scores.push_back(discriminator_score(d, r.image));

  ag::NoGradGuard no_grad;
  const GeneratorParams params = GeneratorParams::from_weights(weights);
  const GeneratorVars g = GeneratorVars::make(params, false);
  const DiscriminatorVars dv = DiscriminatorVars::make(d, false);
  std::mt19937_64 rng(derive_seed(config.seed, 102));
  std::normal_distribution<double> normal;
  for (int i = 0; i < config.eval_size; ++i) {
    Eigen::VectorXd z(weights.shape.latent_dim);
    for (Eigen::Index k = 0; k < z.size(); ++k) z[k] = normal(rng);
    const Var w = mapping_forward(g, ag::constant(z));
    const Var raw = synthesis_forward(g, w, make_noise(weights.shape, rng()));
    fake_scores.push_back(discriminator_forward(dv, raw).scalar());
  }
  return d_loss_logistic(real_scores, fake_scores);
}

TrainResult train(const TrainConfig& config) {
  config.validate();
  const int side = config.shape.resolution();
  const auto dataset =
      procedural_dataset(config.dataset_size, derive_seed(config.seed, 1), side);

  StyleWeights init = random_weights(config.shape, derive_seed(config.seed, 2));
  init.w_mean = compute_w_mean(init, 256, derive_seed(config.seed, 3)).cast<float>();
  GeneratorParams gen = GeneratorParams::from_weights(init);
  Discriminator disc =
      Discriminator::random(side, config.disc_channels, derive_seed(config.seed, 4));

  TrainResult result;
  result.initial_eval_d_loss = evaluate_d_loss(init, disc, config);
  result.checkpoints.push_back({0, gen.to_weights(), {}});

  std::mt19937_64 rng(derive_seed(config.seed, 5));
  AdamState d_state, map_state, syn_state;
  const AdamConfig d_adam{config.lr, config.beta1, config.beta2, config.adam_epsilon};
  const AdamConfig map_adam{config.mapping_lr, config.beta1, config.beta2,
                            config.adam_epsilon};
  const AdamConfig syn_adam = d_adam;
  PathLengthState pl_state;

  for (int step = 0; step < config.steps; ++step) {
    StepLosses losses;
    losses.step = step + 1;

    // Discriminator update.
    {
      const StepBatch batch = draw_batch(config, dataset, rng);
      const bool with_r1 = config.r1_interval > 0 && step % config.r1_interval == 0;
      const GeneratorVars g = GeneratorVars::make(gen, false);
      const DiscriminatorVars d = DiscriminatorVars::make(disc, true);
      const Var loss = discriminator_objective(g, d, batch, config, with_r1);
      require_finite(loss, "discriminator loss", step + 1);
      const std::vector<Var> params = d.all();
      const std::vector<Var> grads = ag::grad(loss, params);
      std::vector<Eigen::MatrixXd> g_values;
      for (const Var& v : grads) {
        require_finite(v, "discriminator gradient", step + 1);
        g_values.push_back(v.value());
      }
      adam_step(disc.tensors(), g_values, d_state, d_adam);
      losses.d_loss = loss.scalar();
    }

    // Generator update.
    {
      const StepBatch batch = draw_batch(config, dataset, rng);
      const bool with_pl = config.pl_interval > 0 && step % config.pl_interval == 0;
      const GeneratorVars g = GeneratorVars::make(gen, true);
      const DiscriminatorVars d = DiscriminatorVars::make(disc, false);
      GeneratorObjective obj =
          generator_objective(g, d, batch, config, with_pl, pl_state);
      require_finite(obj.loss, "generator loss", step + 1);
      const std::vector<Var> map_vars = g.mapping_vars();
      const std::vector<Var> syn_vars = g.synthesis_vars();
      std::vector<Var> all = map_vars;
      all.insert(all.end(), syn_vars.begin(), syn_vars.end());
      const std::vector<Var> grads = ag::grad(obj.loss, all);
      std::vector<Eigen::MatrixXd> map_grads, syn_grads;
      for (std::size_t i = 0; i < grads.size(); ++i) {
        require_finite(grads[i], "generator gradient", step + 1);
        (i < map_vars.size() ? map_grads : syn_grads).push_back(grads[i].value());
      }
      adam_step(gen.mapping_tensors(), map_grads, map_state, map_adam);
      adam_step(gen.synthesis_tensors(), syn_grads, syn_state, syn_adam);
      pl_state = obj.pl_state;

      Eigen::VectorXd batch_mean = Eigen::VectorXd::Zero(gen.w_mean.size());
      for (const Eigen::VectorXd& w : obj.mapped_w) batch_mean += w;
      batch_mean /= static_cast<double>(obj.mapped_w.size());
      gen.w_mean = kWMeanDecay * gen.w_mean + (1.0 - kWMeanDecay) * batch_mean;

      losses.g_loss = obj.adversarial;
      losses.path_length = obj.path_length;
    }

    result.history.push_back(losses);
    if ((step + 1) % config.checkpoint_interval == 0 || step + 1 == config.steps) {
      result.checkpoints.push_back({step + 1, gen.to_weights(), losses});
      spdlog::debug("step {}: d_loss {:.4f} g_loss {:.4f}", step + 1,
                    losses.d_loss, losses.g_loss);
    }
  }

  result.final_eval_d_loss =
      evaluate_d_loss(result.checkpoints.back().weights, disc, config);
  if (!std::isfinite(result.final_eval_d_loss)) {
    throw TrainingDiverged("non-finite evaluation loss", config.steps);
  }
  result.discriminator = std::move(disc);
  return result;
}

std::filesystem::path write_checkpoint(const Checkpoint& checkpoint,
                                       std::uint64_t seed,
                                       const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  char name[32];
  std::snprintf(name, sizeof(name), "ckpt-%06d", checkpoint.step);
  const std::filesystem::path weights_path = dir / (std::string(name) + ".sgw1");
  save_weights(checkpoint.weights, weights_path);
  const nlohmann::json sidecar = {
      {"step", checkpoint.step},
      {"seed", seed},
      {"losses",
       {{"d_loss", checkpoint.losses.d_loss},
        {"g_loss", checkpoint.losses.g_loss},
        {"path_length", checkpoint.losses.path_length}}},
  };
  const std::filesystem::path json_path = dir / (std::string(name) + ".json");
  std::ofstream out(json_path);
  if (!out) throw IoError("cannot open for writing", json_path.string());
  out << sidecar.dump(2) << '\n';
  return weights_path;
}

}  // namespace latentatlas
