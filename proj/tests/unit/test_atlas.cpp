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

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>

#include "latentatlas/atlas.hpp"
#include "latentatlas/errors.hpp"
#include "latentatlas/features.hpp"
#include "latentatlas/tsne.hpp"
#include "support/oracles.hpp"

using namespace latentatlas;

namespace {

using Kind = EmbeddedItem::Kind;

std::vector<AttributeDirection> axis_directions(int n, int dim) {
  std::vector<AttributeDirection> out;
  for (int i = 0; i < n; ++i) {
    AttributeDirection d;
    d.vector = Eigen::VectorXd::Unit(dim, i);
    d.rank = i;
    out.push_back(d);
  }
  return out;
}

Eigen::MatrixXd clustered(int per_cluster, int clusters, int dim, double spread,
                          std::mt19937_64& rng) {
  std::normal_distribution<double> normal;
  Eigen::MatrixXd x(per_cluster * clusters, dim);
  for (int c = 0; c < clusters; ++c) {
    for (int i = 0; i < per_cluster; ++i) {
      for (int j = 0; j < dim; ++j) {
        x(c * per_cluster + i, j) = (j == c ? 10.0 : 0.0) + spread * normal(rng);
      }
    }
  }
  return x;
}

}  // namespace

TEST_SUITE("atlas") {

TEST_CASE("shallow features have fixed size and respond to content") {
  const Image dark = Image::filled(8, 8, 0.1, 0.1, 0.1);
  const Image bright = Image::filled(8, 8, 0.9, 0.2, 0.2);
  const FeatureVector a = extract_features(dark);
  const FeatureVector b = extract_features(bright);
  CHECK(a.size() == kFeatureDim);
  CHECK(b.size() == kFeatureDim);
  CHECK((a - b).norm() > 0.1);
  CHECK(extract_features(dark) == a);
  const FeatureExtractor fx = shallow_extractor();
  CHECK(fx.id == "shallow-v1");
  const std::vector<Image> imgs{dark, bright};
  const Eigen::MatrixXd m = feature_matrix(imgs, fx);
  CHECK(m.rows() == 2);
  CHECK(m.row(1).transpose() == b);
}

TEST_CASE("affinities reach the requested perplexity") {
  std::mt19937_64 rng(2);
  const Eigen::MatrixXd x = latentatlas::testing::random_matrix(40, 5, rng);
  const Affinities aff = calibrate_affinities(squared_distances(x), 10.0);
  for (Eigen::Index i = 0; i < 40; ++i) {
    CHECK(aff.perplexities[i] == doctest::Approx(10.0).epsilon(1e-3));
    CHECK(aff.conditional.row(i).sum() == doctest::Approx(1.0));
    CHECK(aff.conditional(i, i) == 0.0);
  }
}

TEST_CASE("t-SNE separates clusters and is deterministic") {
  std::mt19937_64 rng(3);
  const Eigen::MatrixXd x = clustered(20, 3, 10, 0.5, rng);
  TsneConfig cfg;
  cfg.seed = 9;
  const Embedding2D e1 = tsne(x, cfg);
  const Embedding2D e2 = tsne(x, cfg);
  CHECK(e1.points == e2.points);
  CHECK(e1.kl_final < e1.kl_initial);
  CHECK(e1.kl_decreased);
  CHECK(e1.perplexity == doctest::Approx(59.0 / 3.0));

  double within = 0, between = 0;
  int nw = 0, nb = 0;
  for (int i = 0; i < 60; ++i) {
    for (int j = i + 1; j < 60; ++j) {
      const double dist = (e1.points.row(i) - e1.points.row(j)).norm();
      if (i / 20 == j / 20) {
        within += dist;
        ++nw;
      } else {
        between += dist;
        ++nb;
      }
    }
  }
  CHECK((between / nb) / (within / nw) > 3.0);
}

TEST_CASE("t-SNE handles duplicates and rejects bad input") {
  Eigen::MatrixXd x = Eigen::MatrixXd::Zero(12, 3);
  x.bottomRows(6).setConstant(1.0);
  TsneConfig cfg;
  cfg.iterations = 300;
  const Embedding2D e = tsne(x, cfg);
  CHECK(e.points.allFinite());
  CHECK_THROWS_AS(tsne(Eigen::MatrixXd::Zero(4, 3), cfg), InvalidInput);
  cfg.perplexity = 0;
  CHECK_THROWS_AS(tsne(x, cfg), InvalidInput);
}

TEST_CASE("label_attributes marks directions near prototypes") {
  // Direction 0 sits at x=0, direction 1 at x=10; one prototype at x=0.5.
  Eigen::MatrixXd pts(7, 2);
  pts << 0, 0, 0, 1, 0, 2, 10, 0, 10, 1, 10, 2, 0.5, 0;
  std::vector<EmbeddedItem> items{{Kind::kTraversal, 0, {}}, {Kind::kTraversal, 0, {}},
                                  {Kind::kTraversal, 0, {}}, {Kind::kTraversal, 1, {}},
                                  {Kind::kTraversal, 1, {}}, {Kind::kTraversal, 1, {}},
                                  {Kind::kPrototype, -1, "ulcer-1"}};
  const auto dirs = axis_directions(3, 4);
  const auto k3 = label_attributes(dirs, pts, items, 3);
  CHECK(k3[0].pathology_relevant == true);
  CHECK(k3[1].pathology_relevant == false);
  CHECK(k3[2].pathology_relevant == false);  // no embedded points at all
  const auto k4 = label_attributes(dirs, pts, items, 4);
  CHECK(k4[1].pathology_relevant == true);

  // Relevance only grows with k.
  for (int k = 1; k < 6; ++k) {
    const auto small = label_attributes(dirs, pts, items, k);
    const auto large = label_attributes(dirs, pts, items, k + 1);
    for (std::size_t i = 0; i < dirs.size(); ++i) {
      if (*small[i].pathology_relevant) CHECK(*large[i].pathology_relevant);
    }
  }

  // Equidistant neighbours: the lower index wins.
  Eigen::MatrixXd tie(3, 2);
  tie << -1, 0, 1, 0, 0, 0;
  std::vector<EmbeddedItem> tie_items{{Kind::kTraversal, 1, {}}, {Kind::kTraversal, 0, {}},
                                      {Kind::kPrototype, -1, "p"}};
  const auto tied = label_attributes(axis_directions(2, 2), tie, tie_items, 1);
  CHECK(tied[1].pathology_relevant == true);
  CHECK(tied[0].pathology_relevant == false);

  CHECK_THROWS_AS(label_attributes(dirs, pts.topRows(6), items, 3), InvalidDimension);
  CHECK_THROWS_AS(label_attributes(dirs, pts, items, 0), InvalidInput);
  std::vector<EmbeddedItem> no_proto(items.begin(), items.end() - 1);
  CHECK_THROWS_AS(label_attributes(dirs, pts.topRows(6), no_proto, 3), InvalidInput);
}

TEST_CASE("atlas groups") {
  AttributeDirection d;
  d.vector = Eigen::VectorXd::Unit(2, 0);
  CHECK(atlas_group(d) == kUngrouped);
  d.category = Category::kDebris;
  CHECK(atlas_group(d) == "debris");
  d.label = "Camera Rotation";
  CHECK(atlas_group(d) == "view/rotation");
  d.label = "illumination level";
  CHECK(atlas_group(d) == "modality");
  CHECK(strip_file_name(3, 2.5) == "dir3_a2.5.png");
}

TEST_CASE("build_atlas writes strips and a round-trippable manifest") {
  const StyleWeights w = random_weights({8, 4, 2}, 5);
  auto dirs = axis_directions(2, 8);
  dirs[0].category = Category::kVascular;
  AtlasConfig cfg;
  cfg.base_w = {Eigen::VectorXd::Zero(8), LatentSpace::kW};
  const auto out = std::filesystem::temp_directory_path() / "latentatlas_atlas_test";
  std::filesystem::remove_all(out);

  const AtlasManifest m = build_atlas(dirs, w, cfg, out);
  int pngs = 0;
  for (const auto& e : std::filesystem::directory_iterator(out)) {
    if (e.path().extension() == ".png") ++pngs;
  }
  CHECK(pngs == 10);
  CHECK(m.strips.size() == 2);
  CHECK(m.strips[1].alphas == std::vector<double>{0, 2, 4, 6, 8});
  CHECK(m.groups.at("vascular") == std::vector<int>{0});
  CHECK(m.groups.at(kUngrouped) == std::vector<int>{1});
  CHECK_FALSE(m.embedding.has_value());

  std::ifstream in(out / "atlas.json");
  const AtlasManifest parsed = atlas_manifest_from_json(nlohmann::json::parse(in));
  CHECK(parsed == m);

  // With labeling: embedding points and prototypes are recorded.
  const auto strips = render_strips(dirs, w, cfg);
  const std::vector<Prototype> protos{{"p0", "ulcer", strips[0].images[0].image}};
  TsneConfig tc;
  tc.iterations = 200;
  const LabelingResult lr = embed_and_label(dirs, strips, protos, tc, 3);
  CHECK(lr.items.size() == 11);
  CHECK(*lr.directions[0].pathology_relevant);
  const AtlasManifest labeled = build_atlas(lr.directions, w, cfg, out, &lr, protos);
  REQUIRE(labeled.embedding.has_value());
  CHECK(labeled.embedding->size() == 11);
  CHECK(labeled.embedding->back().kind == "prototype");
  CHECK(labeled.prototypes.front().second == "ulcer");
  CHECK(atlas_manifest_from_json(to_json(labeled)) == labeled);
  std::filesystem::remove_all(out);
}

TEST_CASE("empty atlas manifest") {
  const AtlasManifest empty;
  CHECK(atlas_manifest_from_json(to_json(empty)) == empty);
  CHECK_THROWS_AS(atlas_manifest_from_json(nlohmann::json::object()), InvalidInput);
}

}  // TEST_SUITE
