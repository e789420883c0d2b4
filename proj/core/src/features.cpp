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

#include "latentatlas/features.hpp"

#include <cmath>

#include "latentatlas/errors.hpp"

namespace latentatlas {

FeatureVector extract_features(const Image& image) {
  if (image.height < 1 || image.width < 1 ||
      image.pixels.cols() != image.pixel_count() || image.pixels.rows() != 3) {
    throw InvalidInput("extract_features: malformed image");
  }
  FeatureVector f = FeatureVector::Zero(kFeatureDim);
  const Eigen::RowVectorXd gray = 0.299 * image.pixels.row(0) +
                                  0.587 * image.pixels.row(1) +
                                  0.114 * image.pixels.row(2);
  if (image.height >= kFeatureGrid && image.width >= kFeatureGrid) {
    Eigen::VectorXd counts = Eigen::VectorXd::Zero(kFeatureGrid * kFeatureGrid);
    for (int y = 0; y < image.height; ++y) {
      const int gy = y * kFeatureGrid / image.height;
      for (int x = 0; x < image.width; ++x) {
        const int cell = gy * kFeatureGrid + x * kFeatureGrid / image.width;
        f[cell] += gray[y * image.width + x];
        counts[cell] += 1.0;
      }
    }
    f.head(kFeatureGrid * kFeatureGrid).array() /= counts.array();
  } else {
    // Smaller than the grid: nearest-neighbour upsampling.
    for (int gy = 0; gy < kFeatureGrid; ++gy) {
      for (int gx = 0; gx < kFeatureGrid; ++gx) {
        const int y = gy * image.height / kFeatureGrid;
        const int x = gx * image.width / kFeatureGrid;
        f[gy * kFeatureGrid + gx] = gray[y * image.width + x];
      }
    }
  }
  const int base = kFeatureGrid * kFeatureGrid;
  for (int c = 0; c < 3; ++c) {
    const double mean = image.pixels.row(c).mean();
    const double var = (image.pixels.row(c).array() - mean).square().mean();
    f[base + c] = mean;
    f[base + 3 + c] = std::sqrt(var);
  }
  return f;
}

FeatureExtractor shallow_extractor() {
  return {"shallow-v1", [](const Image& img) { return extract_features(img); }};
}

Eigen::MatrixXd feature_matrix(std::span<const Image> images,
                               const FeatureExtractor& extractor) {
  if (images.empty()) return {};
  Eigen::MatrixXd out;
  for (std::size_t i = 0; i < images.size(); ++i) {
    const FeatureVector f = extractor.extract(images[i]);
    if (i == 0) out.resize(static_cast<Eigen::Index>(images.size()), f.size());
    if (f.size() != out.cols()) throw InvalidDimension("feature dimension changed");
    out.row(static_cast<Eigen::Index>(i)) = f.transpose();
  }
  return out;
}

}  // namespace latentatlas
