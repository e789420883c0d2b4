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

// Small synthetic experiments and a simulated rater for the study tests.

#include <algorithm>
#include <random>
#include <string>

#include "latentatlas/study_service.hpp"
#include "latentatlas/study_types.hpp"

namespace latentatlas::testing {

inline Image tile(int seed) {
  const double v = 0.05 + 0.9 * static_cast<double>(seed % 97) / 97.0;
  Image img = Image::filled(8, 8, v, 1.0 - v, 0.5);
  img.pixels(0, seed % 64) = 0.0;
  return img;
}

inline study::ExperimentConfig small_experiment(const std::string& id, int n_real, int n_gen,
                                                int n_progressions, int ranking_sets,
                                                std::uint64_t seed = 1) {
  study::ExperimentConfig c;
  c.id = id;
  c.seed = seed;
  const Category cats[] = {Category::kVascular, Category::kAnatomical, Category::kDebris,
                           Category::kAbnormal};
  for (int i = 0; i < n_real; ++i) c.real.push_back({"real" + std::to_string(i), tile(i), {}});
  for (int i = 0; i < n_gen; ++i) {
    c.generated.push_back({"gen" + std::to_string(i), tile(1000 + i), cats[i % 4]});
  }
  for (int p = 0; p < n_progressions; ++p) {
    study::ProgressionSpec spec;
    spec.name = "seq" + std::to_string(p);
    for (int k = 0; k < study::kProgressionSize; ++k) spec.images.push_back(tile(2000 + 10 * p + k));
    spec.category = Category::kAbnormal;
    spec.direction = p;
    c.progressions.push_back(std::move(spec));
  }
  c.ranking_count = ranking_sets;
  c.common_count = std::min(c.common_count, n_real + n_gen);
  c.min_images = std::min(c.min_images, n_real + n_gen);
  return c;
}

// A rater who is right with probability `skill` on Turing images and ranks
// one generated image first with probability 1 - skill.
struct SimulatedRater {
  std::mt19937_64 rng;
  double skill = 0.7;

  study::Answer answer(const study::Stimulus& s) {
    std::uniform_real_distribution<double> u;
    std::uniform_int_distribution<int> five(1, 5);
    switch (s.task) {
      case study::Task::kTuring: {
        const Provenance truth = s.truth.provenance.at(0);
        const Provenance other =
            truth == Provenance::kReal ? Provenance::kGenerated : Provenance::kReal;
        return study::TuringAnswer{u(rng) < skill ? truth : other, five(rng)};
      }
      case study::Task::kRanking: {
        study::RankingAnswer a{s.image_ids};
        std::shuffle(a.order.begin(), a.order.end(), rng);
        return a;
      }
      case study::Task::kProgression: {
        study::ProgressionAnswer a;
        int level = 1;
        for (int& sev : a.severities) {
          if (u(rng) < 0.6) level = std::min(4, level + 1);
          sev = level;
        }
        a.plausibility = five(rng);
        return a;
      }
    }
    return study::FinishTask{};
  }
};

inline study::ExpertProfile profile(const std::string& user, int years = 5) {
  return {user, years, study::Familiarity::kVeryFamiliar, std::nullopt};
}

}  // namespace latentatlas::testing
