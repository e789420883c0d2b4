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

#include "latentatlas/traversal.hpp"

#include <cmath>
#include <fstream>

#include "latentatlas/errors.hpp"
#include "latentatlas/image_io.hpp"

namespace latentatlas {

void validate(const TraversalSpec& spec) {
  const double lo = spec.interval_lo, hi = spec.interval_hi, step = spec.step_alpha;
  if (!std::isfinite(lo) || !std::isfinite(hi) || !std::isfinite(step)) {
    throw InvalidInput("traversal interval and step must be finite");
  }
  if (!(hi > lo)) throw InvalidInput("traversal interval needs B > A");
  if (!(step > 0)) throw InvalidInput("traversal step must be > 0");
  if (!spec.allow_any_interval && (lo < 0.0 || hi > kDefaultIntervalMax)) {
    throw InvalidInput("traversal interval outside [0, 50]; set allow_any_interval");
  }
  if (!spec.base_w.values.allFinite() || !spec.direction.vector.allFinite()) {
    throw InvalidInput("traversal base code and direction must be finite");
  }
  if (spec.base_w.values.size() != spec.direction.vector.size()) {
    throw InvalidInput("direction and base code dimensions differ");
  }
  if (std::abs(spec.direction.vector.norm() - 1.0) > 1e-9) {
    throw InvalidInput("traversal direction must be a unit vector");
  }
}

std::vector<double> traversal_alphas(const TraversalSpec& spec) {
  validate(spec);
  const double span = (spec.interval_hi - spec.interval_lo) / spec.step_alpha;
  const auto steps = static_cast<long>(std::floor(span * (1.0 + 1e-9)));
  std::vector<double> alphas;
  alphas.reserve(static_cast<std::size_t>(steps + 1));
  for (long j = 0; j <= steps; ++j) {
    alphas.push_back(spec.interval_lo + static_cast<double>(j) * spec.step_alpha);
  }
  return alphas;
}

std::vector<LatentCode> traverse_codes(const TraversalSpec& spec) {
  std::vector<LatentCode> codes;
  for (double alpha : traversal_alphas(spec)) {
    codes.push_back({spec.base_w.values - alpha * spec.direction.vector,
                     spec.base_w.space});
  }
  return codes;
}

std::vector<GeneratedImage> render_traversal(const TraversalSpec& spec,
                                             const StyleWeights& weights,
                                             NoiseSeed noise_seed) {
  const std::vector<double> alphas = traversal_alphas(spec);
  const std::vector<LatentCode> codes = traverse_codes(spec);
  std::vector<GeneratedImage> images;
  images.reserve(codes.size());
  for (std::size_t j = 0; j < codes.size(); ++j) {
    GeneratedImage img = synthesize(codes[j], weights, noise_seed);
    img.direction_id = spec.direction.rank;
    img.alpha = alphas[j];
    images.push_back(std::move(img));
  }
  return images;
}

std::vector<double> progression_alphas(double lo, double hi, int n) {
  if (n < 2) throw InvalidInput("a progression needs at least 2 images");
  if (!std::isfinite(lo) || !std::isfinite(hi) || !(hi > lo)) {
    throw InvalidInput("progression interval needs finite B > A");
  }
  std::vector<double> alphas(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k) {
    alphas[k] = lo + (hi - lo) * static_cast<double>(k) / static_cast<double>(n - 1);
  }
  alphas.back() = hi;
  return alphas;
}

ProgressionSequence make_progression(std::string id, const LatentCode& base_w,
                                     const AttributeDirection& direction,
                                     std::pair<double, double> interval,
                                     const StyleWeights& weights,
                                     NoiseSeed noise_seed, int n) {
  ProgressionSequence seq;
  seq.alphas = progression_alphas(interval.first, interval.second, n);
  // Reuse the traversal validation for dimensions and unit norm.
  validate(TraversalSpec{base_w, direction, interval.first, interval.second,
                         interval.second - interval.first, true});
  seq.id = std::move(id);
  seq.direction_id = direction.rank;
  seq.base_w = base_w;
  seq.category = direction.category;
  for (double alpha : seq.alphas) {
    LatentCode code{base_w.values - alpha * direction.vector, base_w.space};
    GeneratedImage img = synthesize(code, weights, noise_seed);
    img.direction_id = direction.rank;
    img.alpha = alpha;
    seq.codes.push_back(std::move(code));
    seq.images.push_back(std::move(img));
  }
  return seq;
}

AttributeDirection assign_category(const AttributeDirection& direction,
                                   const std::string& category) {
  AttributeDirection tagged = direction;
  tagged.category = parse_category(category);
  return tagged;
}

nlohmann::json progression_manifest(const ProgressionSequence& seq,
                                    const std::vector<std::string>& image_files) {
  const Eigen::VectorXd& w = seq.base_w.values;
  return {
      {"id", seq.id},
      {"direction_id", seq.direction_id},
      {"base_w", std::vector<double>(w.data(), w.data() + w.size())},
      {"alphas", seq.alphas},
      {"images", image_files},
      {"category", seq.category ? nlohmann::json(to_string(*seq.category))
                                : nlohmann::json(nullptr)},
  };
}

nlohmann::json write_progression(const ProgressionSequence& seq,
                                 const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  std::vector<std::string> files;
  for (std::size_t k = 0; k < seq.images.size(); ++k) {
    const std::string name = seq.id + "_" + std::to_string(k + 1) + ".png";
    write_png(seq.images[k].image, dir / name);
    files.push_back(name);
  }
  nlohmann::json manifest = progression_manifest(seq, files);
  const std::filesystem::path path = dir / (seq.id + ".json");
  std::ofstream out(path);
  if (!out) throw IoError("cannot open for writing", path.string());
  out << manifest.dump(2) << '\n';
  return manifest;
}

}  // namespace latentatlas
