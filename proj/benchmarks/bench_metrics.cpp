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

#include <benchmark/benchmark.h>

#include <Eigen/Dense>

#include <cstdlib>

#include "latentatlas/metrics.hpp"
#include "latentatlas/tsne.hpp"

namespace {

latentatlas::GaussianSummary random_gaussian(Eigen::Index n, unsigned seed) {
  std::srand(seed);
  const Eigen::MatrixXd b = Eigen::MatrixXd::Random(n, n);
  return {Eigen::VectorXd::Random(n), b * b.transpose() + Eigen::MatrixXd::Identity(n, n)};
}

void BM_FrechetDistance(benchmark::State& state) {
  const auto n = static_cast<Eigen::Index>(state.range(0));
  const auto a = random_gaussian(n, 1), b = random_gaussian(n, 2);
  for (auto _ : state) benchmark::DoNotOptimize(latentatlas::frechet_distance(a, b));
}
BENCHMARK(BM_FrechetDistance)->Arg(16)->Arg(70)->Arg(128)->Unit(benchmark::kMillisecond);

void BM_Tsne(benchmark::State& state) {
  const auto n = static_cast<Eigen::Index>(state.range(0));
  std::srand(5);
  const Eigen::MatrixXd x = Eigen::MatrixXd::Random(n, 70);
  for (auto _ : state) benchmark::DoNotOptimize(latentatlas::tsne(x));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_Tsne)->Arg(60)->Arg(200)->Arg(400)->Unit(benchmark::kMillisecond)->Complexity();

}  // namespace
