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

// SGW1 weight file.
//
//   offset 0  "SGW1"
//   offset 4  u8 version (= 1)
//   offset 5  u32 d, u32 m, u32 L, u32 C   (little-endian)
//   offset 21 float32 little-endian tensors, row-major, in this order:
//     8 mapping layers: weight d x d, bias d
//     L affines:        A m x d, b m   (b: first C scales, last C shifts)
//     L convs:          C x C x 3 x 3  (out, in, ky, kx)
//     L noise scales
//     toRGB:            weight 3 x C, bias 3
//     constant input:   C x 4 x 4      (channel, y, x)
//     w_mean:           d

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "latentatlas/gen_core.hpp"

namespace latentatlas {

inline constexpr std::uint8_t kSgwVersion = 1;
inline constexpr std::uint64_t kSgwHeaderBytes = 21;

std::vector<std::uint8_t> encode_weights(const StyleWeights& weights);
StyleWeights decode_weights(std::span<const std::uint8_t> bytes);

/// Total file size implied by a header.
std::uint64_t sgw_file_size(const GeneratorShape& shape);

void save_weights(const StyleWeights& weights,
                  const std::filesystem::path& path);
StyleWeights load_weights(const std::filesystem::path& path);

}  // namespace latentatlas
