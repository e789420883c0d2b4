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

#include "latentatlas/factorization.hpp"

#include <algorithm>
#include <cmath>

#include "latentatlas/errors.hpp"
#include "latentatlas/jacobi.hpp"

namespace latentatlas {
namespace {

constexpr double kSignThreshold = 1e-10;
constexpr double kTieTolerance = 1e-9;

void normalize_sign(Eigen::VectorXd& v) {
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (std::abs(v[i]) > kSignThreshold) {
      if (v[i] < 0) v = -v;
      return;
    }
  }
}

bool lexicographically_greater(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    if (a[i] != b[i]) return a[i] > b[i];
  }
  return false;
}

}  // namespace

const char* to_string(Category c) {
  switch (c) {
    case Category::kVascular: return "vascular";
    case Category::kAnatomical: return "anatomical";
    case Category::kDebris: return "debris";
    case Category::kAbnormal: return "abnormal";
  }
  return "?";
}

Category parse_category(const std::string& name) {
  if (name == "vascular") return Category::kVascular;
  if (name == "anatomical") return Category::kAnatomical;
  if (name == "debris") return Category::kDebris;
  if (name == "abnormal") return Category::kAbnormal;
  throw InvalidInput("unknown category '" + name +
                     "' (expected vascular, anatomical, debris or abnormal)");
}

Eigen::MatrixXd stack_affine(const StyleWeights& weights,
                             std::span<const int> layers) {
  if (layers.empty()) throw InvalidInput("stack_affine: empty layer selection");
  weights.validate();
  const Eigen::Index rows_per_layer = weights.shape.style_dim();
  Eigen::MatrixXd stacked(rows_per_layer * static_cast<Eigen::Index>(layers.size()),
                          weights.shape.latent_dim);
  Eigen::Index row = 0;
  for (int layer : layers) {
    if (layer < 0 || layer >= weights.shape.blocks) {
      throw InvalidLayer("stack_affine: layer " + std::to_string(layer) +
                         " out of range");
    }
    const Eigen::MatrixXd a = weights.affine[layer].weight.cast<double>();
    for (Eigen::Index r = 0; r < a.rows(); ++r, ++row) {
      const double norm = a.row(r).norm();
      stacked.row(row) = norm > 0 ? Eigen::RowVectorXd(a.row(r) / norm)
                                  : Eigen::RowVectorXd(a.row(r));
    }
  }
  return stacked;
}

Eigen::MatrixXd stack_affine(const StyleWeights& weights) {
  std::vector<int> all(static_cast<std::size_t>(weights.shape.blocks));
  for (int i = 0; i < weights.shape.blocks; ++i) all[i] = i;
  return stack_affine(weights, all);
}

std::vector<AttributeDirection> sefa(const Eigen::MatrixXd& affine, int count) {
  const Eigen::Index d = affine.cols();
  if (count < 0 || count > d) {
    throw InvalidInput("sefa: requested " + std::to_string(count) +
                       " directions from a " + std::to_string(d) +
                       "-dimensional latent space");
  }
  if (!affine.allFinite()) throw InvalidInput("sefa: affine matrix is not finite");
  if (count == 0) return {};

  const Eigen::MatrixXd gram = affine.transpose() * affine;
  const SymmetricEigen eig = jacobi_eigen(gram);

  std::vector<AttributeDirection> all;
  all.reserve(static_cast<std::size_t>(d));
  for (Eigen::Index i = 0; i < d; ++i) {
    AttributeDirection dir;
    dir.vector = eig.vectors.col(i).normalized();
    normalize_sign(dir.vector);
    dir.eigenvalue = eig.values[i];
    all.push_back(std::move(dir));
  }
  // Values are already descending; reorder runs of (numerically) equal
  // eigenvalues by their vectors so the output is reproducible.
  const double tie = kTieTolerance * std::max(std::abs(eig.values[0]), 1e-300);
  std::size_t begin = 0;
  while (begin < all.size()) {
    std::size_t end = begin + 1;
    while (end < all.size() &&
           all[end - 1].eigenvalue - all[end].eigenvalue <= tie) {
      ++end;
    }
    std::sort(all.begin() + static_cast<std::ptrdiff_t>(begin),
              all.begin() + static_cast<std::ptrdiff_t>(end),
              [](const AttributeDirection& a, const AttributeDirection& b) {
                return lexicographically_greater(a.vector, b.vector);
              });
    begin = end;
  }

  all.resize(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) all[i].rank = i;
  return all;
}

bool SpectrumReport::all_ok() const {
  return std::all_of(checks.begin(), checks.end(),
                     [](const SpectrumCheck& c) { return c.ok; });
}

std::vector<int> SpectrumReport::failed_ranks() const {
  std::vector<int> out;
  for (const SpectrumCheck& c : checks) {
    if (!c.ok) out.push_back(c.rank);
  }
  return out;
}

SpectrumReport verify_spectrum(const Eigen::MatrixXd& affine,
                               std::span<const AttributeDirection> directions,
                               double tolerance) {
  SpectrumReport report;
  // Eigenvalues at the round-off level of A^T A are compared on that scale.
  const double floor = 1e-10 * affine.squaredNorm();
  for (const AttributeDirection& dir : directions) {
    SpectrumCheck check;
    check.rank = dir.rank;
    check.eigenvalue = dir.eigenvalue;
    if (dir.vector.size() != affine.cols()) {
      report.checks.push_back(check);
      continue;
    }
    check.recomputed = (affine * dir.vector).squaredNorm();
    const double denom = std::max({std::abs(dir.eigenvalue), floor, 1e-300});
    check.relative_residual = std::abs(check.recomputed - dir.eigenvalue) / denom;
    check.ok = check.relative_residual <= tolerance &&
               std::abs(dir.vector.norm() - 1.0) <= 1e-9;
    report.checks.push_back(check);
  }
  return report;
}

nlohmann::json to_json(const AttributeDirection& d) {
  nlohmann::json j;
  j["rank"] = d.rank;
  j["eigenvalue"] = d.eigenvalue;
  j["vector"] = std::vector<double>(d.vector.data(), d.vector.data() + d.vector.size());
  j["label"] = d.label ? nlohmann::json(*d.label) : nlohmann::json(nullptr);
  j["category"] = d.category ? nlohmann::json(to_string(*d.category))
                             : nlohmann::json(nullptr);
  j["pathology_relevant"] = d.pathology_relevant
                                ? nlohmann::json(*d.pathology_relevant)
                                : nlohmann::json(nullptr);
  return j;
}

AttributeDirection direction_from_json(const nlohmann::json& j) {
  try {
    AttributeDirection d;
    d.rank = j.at("rank").get<int>();
    d.eigenvalue = j.at("eigenvalue").get<double>();
    const auto values = j.at("vector").get<std::vector<double>>();
    d.vector = Eigen::Map<const Eigen::VectorXd>(values.data(),
                                                 static_cast<Eigen::Index>(values.size()));
    if (j.contains("label") && !j["label"].is_null()) d.label = j["label"].get<std::string>();
    if (j.contains("category") && !j["category"].is_null()) {
      d.category = parse_category(j["category"].get<std::string>());
    }
    if (j.contains("pathology_relevant") && !j["pathology_relevant"].is_null()) {
      d.pathology_relevant = j["pathology_relevant"].get<bool>();
    }
    if (std::abs(d.vector.norm() - 1.0) > 1e-6) {
      throw InvalidInput("direction " + std::to_string(d.rank) + " is not a unit vector");
    }
    return d;
  } catch (const nlohmann::json::exception& e) {
    throw InvalidInput(std::string("malformed direction record: ") + e.what());
  }
}

nlohmann::json directions_manifest(std::span<const AttributeDirection> directions) {
  nlohmann::json list = nlohmann::json::array();
  for (const AttributeDirection& d : directions) list.push_back(to_json(d));
  return {{"schema", "directions/1"}, {"directions", list}};
}

std::vector<AttributeDirection> parse_directions_manifest(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("directions") || !j["directions"].is_array()) {
    throw InvalidInput("direction manifest must be an object with a 'directions' array");
  }
  std::vector<AttributeDirection> out;
  for (const nlohmann::json& d : j["directions"]) out.push_back(direction_from_json(d));
  return out;
}

}  // namespace latentatlas
