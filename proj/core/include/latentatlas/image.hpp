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

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace latentatlas {

/// RGB image with values in [0,1]. Stored as 3 x (height*width), pixel index
/// y * width + x.
struct Image {
  int height = 0;
  int width = 0;
  Eigen::MatrixXd pixels;

  static Image filled(int height, int width, double r, double g, double b);

  double at(int channel, int y, int x) const {
    return pixels(channel, y * width + x);
  }
  int pixel_count() const { return height * width; }

  /// Interleaved 8-bit RGB, row-major, rounding to nearest.
  std::vector<std::uint8_t> to_rgb8() const;
  static Image from_rgb8(int height, int width,
                         const std::vector<std::uint8_t>& rgb);

  bool operator==(const Image&) const = default;
};

enum class Provenance { kReal, kGenerated };

const char* to_string(Provenance p);

}  // namespace latentatlas
