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

#include <cstdint>
#include <optional>
#include <random>
#include <vector>

#include "latentatlas/study_stats.hpp"

namespace {

using latentatlas::study::RatingTable;

RatingTable random_table(int items, int raters, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> value(0, 1);
  std::bernoulli_distribution missing(0.1);
  RatingTable t(items, std::vector<std::optional<int>>(raters));
  for (auto& row : t)
    for (auto& cell : row)
      if (!missing(rng)) cell = value(rng);
  return t;
}

void BM_Krippendorff(benchmark::State& state) {
  const RatingTable t = random_table(static_cast<int>(state.range(0)), 8, 1);
  for (auto _ : state) benchmark::DoNotOptimize(latentatlas::study::krippendorff_alpha(t));
}
BENCHMARK(BM_Krippendorff)->Arg(50)->Arg(500)->Arg(5000);

void BM_ExactBinomial(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(latentatlas::study::exact_binomial_test(n / 2 + n / 20, n));
  }
}
BENCHMARK(BM_ExactBinomial)->Arg(50)->Arg(1024)->Arg(100000);

}  // namespace
