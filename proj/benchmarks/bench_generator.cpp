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

#include "latentatlas/gen_core.hpp"
#include "latentatlas/trainer.hpp"

namespace {

void BM_Synthesize(benchmark::State& state) {
  const int blocks = static_cast<int>(state.range(0));
  const latentatlas::StyleWeights w = latentatlas::random_weights({64, 16, blocks}, 2);
  const latentatlas::LatentCode code = latentatlas::map_latent(latentatlas::sample_z(64, 3), w);
  for (auto _ : state) benchmark::DoNotOptimize(latentatlas::synthesize(code, w, 4));
}
BENCHMARK(BM_Synthesize)->DenseRange(2, 4)->Unit(benchmark::kMicrosecond);

void BM_TrainSteps(benchmark::State& state) {
  latentatlas::TrainConfig cfg;
  cfg.steps = static_cast<int>(state.range(0));
  cfg.checkpoint_interval = cfg.steps;
  for (auto _ : state) benchmark::DoNotOptimize(latentatlas::train(cfg));
}
BENCHMARK(BM_TrainSteps)->Arg(16)->Unit(benchmark::kMillisecond);

}  // namespace
