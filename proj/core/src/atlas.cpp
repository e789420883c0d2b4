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

#include "latentatlas/atlas.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <set>

#include "latentatlas/errors.hpp"
#include "latentatlas/image_io.hpp"

namespace latentatlas {
namespace {

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

}  // namespace

std::vector<AttributeDirection> label_attributes(
    std::vector<AttributeDirection> directions, const Eigen::MatrixXd& points,
    std::span<const EmbeddedItem> items, int k) {
  if (static_cast<std::size_t>(points.rows()) != items.size()) {
    throw InvalidDimension("label_attributes: one item per embedded point required");
  }
  if (k < 1) throw InvalidInput("label_attributes: k must be >= 1");
  std::vector<Eigen::Index> prototypes, traversal;
  for (std::size_t i = 0; i < items.size(); ++i) {
    (items[i].kind == EmbeddedItem::Kind::kPrototype ? prototypes : traversal)
        .push_back(static_cast<Eigen::Index>(i));
  }
  if (prototypes.empty()) throw InvalidInput("label_attributes: no prototypes");

  std::set<int> relevant;
  std::vector<std::pair<double, Eigen::Index>> ranked;
  for (Eigen::Index proto : prototypes) {
    ranked.clear();
    for (Eigen::Index t : traversal) {
      ranked.emplace_back((points.row(t) - points.row(proto)).squaredNorm(), t);
    }
    const std::size_t take = std::min<std::size_t>(static_cast<std::size_t>(k), ranked.size());
    std::partial_sort(ranked.begin(), ranked.begin() + static_cast<std::ptrdiff_t>(take),
                      ranked.end());
    for (std::size_t i = 0; i < take; ++i) {
      relevant.insert(items[static_cast<std::size_t>(ranked[i].second)].direction_rank);
    }
  }
  for (AttributeDirection& d : directions) {
    d.pathology_relevant = relevant.count(d.rank) > 0;
  }
  return directions;
}

std::vector<AtlasStrip> render_strips(std::span<const AttributeDirection> directions,
                                      const StyleWeights& weights,
                                      const AtlasConfig& config) {
  std::vector<AtlasStrip> strips;
  for (const AttributeDirection& d : directions) {
    TraversalSpec spec{config.base_w, d, config.interval_lo, config.interval_hi,
                       config.step_alpha, config.allow_any_interval};
    strips.push_back({d.rank, render_traversal(spec, weights, config.noise_seed)});
  }
  return strips;
}

LabelingResult embed_and_label(std::vector<AttributeDirection> directions,
                               std::span<const AtlasStrip> strips,
                               std::span<const Prototype> prototypes,
                               const TsneConfig& tsne_config, int k) {
  if (prototypes.empty()) throw InvalidInput("embed_and_label: no prototypes");
  std::vector<Image> images;
  LabelingResult result;
  for (const AtlasStrip& strip : strips) {
    for (const GeneratedImage& img : strip.images) {
      images.push_back(img.image);
      result.items.push_back({EmbeddedItem::Kind::kTraversal, strip.rank, {}});
    }
  }
  for (const Prototype& p : prototypes) {
    images.push_back(p.image);
    result.items.push_back({EmbeddedItem::Kind::kPrototype, -1, p.id});
  }
  const Eigen::MatrixXd features = feature_matrix(images, shallow_extractor());
  result.embedding = tsne(features, tsne_config);
  result.directions = label_attributes(std::move(directions), result.embedding.points,
                                       result.items, k);
  return result;
}

std::string atlas_group(const AttributeDirection& d) {
  if (d.label) {
    const std::string l = lower(*d.label);
    if (l.find("view") != std::string::npos || l.find("rotation") != std::string::npos) {
      return "view/rotation";
    }
    if (l.find("modality") != std::string::npos ||
        l.find("illumination") != std::string::npos) {
      return "modality";
    }
  }
  if (d.category) return to_string(*d.category);
  return kUngrouped;
}

std::string strip_file_name(int rank, double alpha) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "dir%d_a%g.png", rank, alpha);
  return buf;
}

nlohmann::json to_json(const AtlasManifest& m) {
  nlohmann::json j;
  j["schema"] = "atlas/1";
  j["directions"] = directions_manifest(m.directions)["directions"];
  nlohmann::json groups = nlohmann::json::object();
  for (const auto& [name, ranks] : m.groups) groups[name] = ranks;
  j["groups"] = groups;
  nlohmann::json strips = nlohmann::json::array();
  for (const AtlasStripEntry& s : m.strips) {
    strips.push_back({{"rank", s.rank}, {"alphas", s.alphas}, {"files", s.files}});
  }
  j["strips"] = strips;
  if (m.embedding) {
    nlohmann::json pts = nlohmann::json::array();
    for (const AtlasEmbeddingPoint& p : *m.embedding) {
      pts.push_back({{"x", p.x}, {"y", p.y}, {"kind", p.kind}, {"ref", p.ref}});
    }
    j["embedding"] = pts;
  } else {
    j["embedding"] = nullptr;
  }
  nlohmann::json protos = nlohmann::json::array();
  for (const auto& [id, tag] : m.prototypes) protos.push_back({{"id", id}, {"tag", tag}});
  j["prototypes"] = protos;
  return j;
}

AtlasManifest atlas_manifest_from_json(const nlohmann::json& j) {
  try {
    AtlasManifest m;
    m.directions = parse_directions_manifest(j);
    for (const auto& [name, ranks] : j.at("groups").items()) {
      m.groups[name] = ranks.get<std::vector<int>>();
    }
    for (const nlohmann::json& s : j.at("strips")) {
      m.strips.push_back({s.at("rank").get<int>(),
                          s.at("alphas").get<std::vector<double>>(),
                          s.at("files").get<std::vector<std::string>>()});
    }
    if (j.contains("embedding") && !j["embedding"].is_null()) {
      std::vector<AtlasEmbeddingPoint> pts;
      for (const nlohmann::json& p : j["embedding"]) {
        pts.push_back({p.at("x").get<double>(), p.at("y").get<double>(),
                       p.at("kind").get<std::string>(), p.at("ref").get<std::string>()});
      }
      m.embedding = std::move(pts);
    }
    for (const nlohmann::json& p : j.at("prototypes")) {
      m.prototypes.emplace_back(p.at("id").get<std::string>(),
                                p.at("tag").get<std::string>());
    }
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw InvalidInput(std::string("malformed atlas manifest: ") + e.what());
  }
}

AtlasManifest build_atlas(std::span<const AttributeDirection> directions,
                          const StyleWeights& weights, const AtlasConfig& config,
                          const std::filesystem::path& out_dir,
                          const LabelingResult* labeling,
                          std::span<const Prototype> prototypes) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw IoError("cannot create directory (" + ec.message() + ")", out_dir.string());

  AtlasManifest m;
  m.directions.assign(directions.begin(), directions.end());
  for (const std::string& g : kAtlasGroups) m.groups[g] = {};
  m.groups[kUngrouped] = {};
  for (const AttributeDirection& d : directions) m.groups[atlas_group(d)].push_back(d.rank);

  for (const AtlasStrip& strip : render_strips(directions, weights, config)) {
    AtlasStripEntry entry;
    entry.rank = strip.rank;
    for (const GeneratedImage& img : strip.images) {
      const std::string name = strip_file_name(strip.rank, *img.alpha);
      write_png(img.image, out_dir / name);
      entry.alphas.push_back(*img.alpha);
      entry.files.push_back(name);
    }
    m.strips.push_back(std::move(entry));
  }

  if (labeling) {
    std::vector<AtlasEmbeddingPoint> pts;
    for (std::size_t i = 0; i < labeling->items.size(); ++i) {
      const EmbeddedItem& item = labeling->items[i];
      const bool proto = item.kind == EmbeddedItem::Kind::kPrototype;
      pts.push_back({labeling->embedding.points(static_cast<Eigen::Index>(i), 0),
                     labeling->embedding.points(static_cast<Eigen::Index>(i), 1),
                     proto ? "prototype" : "traversal",
                     proto ? item.prototype_id : std::to_string(item.direction_rank)});
    }
    m.embedding = std::move(pts);
  }
  for (const Prototype& p : prototypes) m.prototypes.emplace_back(p.id, p.tag);

  const std::filesystem::path path = out_dir / "atlas.json";
  std::ofstream out(path);
  if (!out) throw IoError("cannot open for writing", path.string());
  out << to_json(m).dump(2) << '\n';
  if (!out) throw IoError("write failed", path.string());
  return m;
}

}  // namespace latentatlas
