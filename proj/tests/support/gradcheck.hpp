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

// Finite-difference checks of every training objective on a tiny generator
// (d=4, C=4, L=2) and discriminator (8x8, 4 channels).

#include <random>
#include <vector>

#include "latentatlas/trainer.hpp"
#include "support/oracles.hpp"

namespace latentatlas::testing {

struct TinyTrainingProblem {
  TrainConfig config;
  GeneratorParams generator;
  Discriminator discriminator;
  StepBatch batch;

  std::size_t parameter_count() {
    std::size_t n = discriminator.parameter_count();
    for (const Eigen::MatrixXd* t : generator.all_tensors()) n += static_cast<std::size_t>(t->size());
    return n;
  }
};

inline TinyTrainingProblem tiny_problem(std::uint64_t seed) {
  TinyTrainingProblem p;
  p.config.shape = {4, 4, 2};
  p.config.disc_channels = 4;
  p.config.batch_size = 2;
  p.config.seed = seed;
  p.generator = GeneratorParams::from_weights(random_weights(p.config.shape, seed));
  p.discriminator = Discriminator::random(8, 4, seed + 1);
  // The default head starts at zero; a random head exercises every path.
  std::mt19937_64 rng(seed + 2);
  p.discriminator.dense_weight =
      random_matrix(1, p.discriminator.dense_weight.cols(), rng, 0.5);
  p.discriminator.dense_bias = random_matrix(1, 1, rng, 0.1);
  const auto data = procedural_dataset(8, seed + 3, 8);
  p.batch = draw_batch(p.config, data, rng);
  return p;
}

inline std::vector<Eigen::MatrixXd> values(const std::vector<ag::Var>& vars) {
  std::vector<Eigen::MatrixXd> out;
  for (const ag::Var& v : vars) out.push_back(v.value());
  return out;
}

/// Relative error of d(D objective)/d(D params).
inline double discriminator_gradient_error(TinyTrainingProblem& p, bool with_r1) {
  const GeneratorVars g = GeneratorVars::make(p.generator, false);
  auto loss = [&] {
    const DiscriminatorVars d = DiscriminatorVars::make(p.discriminator, false);
    return discriminator_objective(g, d, p.batch, p.config, with_r1).scalar();
  };
  const DiscriminatorVars d = DiscriminatorVars::make(p.discriminator, true);
  const ag::Var objective = discriminator_objective(g, d, p.batch, p.config, with_r1);
  const auto analytic = values(ag::grad(objective, d.all()));
  return max_relative_error(analytic, finite_difference_gradient(loss, p.discriminator.tensors()));
}

/// Relative error of d(G objective)/d(G params), mapping and synthesis.
inline double generator_gradient_error(TinyTrainingProblem& p, bool with_pl) {
  const DiscriminatorVars d = DiscriminatorVars::make(p.discriminator, false);
  const PathLengthState state{0.5};
  auto loss = [&] {
    const GeneratorVars g = GeneratorVars::make(p.generator, false);
    return generator_objective(g, d, p.batch, p.config, with_pl, state).loss.scalar();
  };
  const GeneratorVars g = GeneratorVars::make(p.generator, true);
  std::vector<ag::Var> vars = g.mapping_vars();
  for (const ag::Var& v : g.synthesis_vars()) vars.push_back(v);
  const ag::Var objective = generator_objective(g, d, p.batch, p.config, with_pl, state).loss;
  const auto analytic = values(ag::grad(objective, vars));
  std::vector<Eigen::MatrixXd*> tensors = p.generator.mapping_tensors();
  for (Eigen::MatrixXd* t : p.generator.synthesis_tensors()) tensors.push_back(t);
  return max_relative_error(analytic, finite_difference_gradient(loss, tensors));
}

/// Relative error of the R1 penalty against (gamma/2) mean ||grad_x D||^2
/// with the input gradient taken by central differences (step 1e-3).
inline double r1_input_gradient_error(TinyTrainingProblem& p, double gamma) {
  const DiscriminatorVars d = DiscriminatorVars::make(p.discriminator, false);
  const ScoreFn score = [&d](const ag::Var& x) { return discriminator_forward(d, x); };
  const double analytic = r1_penalty(score, p.batch.reals, gamma).scalar();
  double total = 0.0;
  for (Eigen::MatrixXd x : p.batch.reals) {
    auto f = [&] { return score(ag::constant(x)).scalar(); };
    const auto g = finite_difference_gradient(f, {&x}, 1e-3);
    total += g[0].squaredNorm();
  }
  const double numeric = 0.5 * gamma * total / static_cast<double>(p.batch.reals.size());
  return std::abs(analytic - numeric) / std::max(std::abs(numeric), 1e-12);
}

/// Relative error of d(path-length penalty)/d(G synthesis params) for fixed w.
inline double path_length_gradient_error(TinyTrainingProblem& p) {
  const int side = p.config.shape.resolution();
  std::vector<Eigen::VectorXd> ws;
  {
    const GeneratorVars g = GeneratorVars::make(p.generator, false);
    for (const Eigen::VectorXd& z : p.batch.z) {
      ws.push_back(mapping_forward(g, ag::constant(z)).value().col(0));
    }
  }
  auto penalty = [&](const GeneratorVars& g) {
    std::vector<ag::Var> w_vars;
    for (const Eigen::VectorXd& w : ws) w_vars.push_back(ag::parameter(w));
    std::size_t index = 0;
    const GeneratorFn gen = [&](const ag::Var& w) {
      return synthesis_forward(g, w, p.batch.noise[index++]);
    };
    return path_length_penalty(gen, w_vars, p.batch.pl_directions, side, side, {0.5}, 0.99).penalty;
  };
  auto loss = [&] { return penalty(GeneratorVars::make(p.generator, false)).scalar(); };
  const GeneratorVars g = GeneratorVars::make(p.generator, true);
  const auto analytic = values(ag::grad(penalty(g), g.synthesis_vars()));
  return max_relative_error(analytic, finite_difference_gradient(loss, p.generator.synthesis_tensors()));
}

}  // namespace latentatlas::testing
