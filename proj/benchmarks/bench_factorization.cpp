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

#include "latentatlas/factorization.hpp"
#include "latentatlas/gen_core.hpp"
#include "latentatlas/jacobi.hpp"

namespace {

void BM_Jacobi(benchmark::State& state) {
  const auto n = static_cast<Eigen::Index>(state.range(0));
  Eigen::MatrixXd a = Eigen::MatrixXd::Random(n, n);
  a = a * a.transpose();
  for (auto _ : state) benchmark::DoNotOptimize(latentatlas::jacobi_eigen(a));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_Jacobi)->RangeMultiplier(2)->Range(16, 256)->Complexity();

// Full direction discovery on a generator-sized affine stack.
void BM_SefaFromWeights(benchmark::State& state) {
  const int d = static_cast<int>(state.range(0));
  const latentatlas::StyleWeights w = latentatlas::random_weights({d, 64, 3}, 1);
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        latentatlas::sefa(latentatlas::stack_affine(w), latentatlas::kDefaultDirectionCount));
  }
}
BENCHMARK(BM_SefaFromWeights)->Arg(64)->Arg(128)->Arg(256)->Unit(benchmark::kMillisecond);

}  // namespace
