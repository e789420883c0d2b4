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

#include "latentatlas/weights_io.hpp"

#include <bit>
#include <fstream>
#include <iterator>

#include "latentatlas/errors.hpp"

namespace latentatlas {
namespace {

constexpr char kMagic[4] = {'S', 'G', 'W', '1'};

class Writer {
 public:
  void u8(std::uint8_t v) { out_.push_back(v); }
  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void f32(float v) { u32(std::bit_cast<std::uint32_t>(v)); }
  void matrix(const Eigen::MatrixXf& m) {
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
      for (Eigen::Index c = 0; c < m.cols(); ++c) f32(m(r, c));
    }
  }
  void vector(const Eigen::VectorXf& v) {
    for (Eigen::Index i = 0; i < v.size(); ++i) f32(v[i]);
  }
  std::vector<std::uint8_t> take() { return std::move(out_); }

 private:
  std::vector<std::uint8_t> out_;
};

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  std::uint64_t offset() const { return pos_; }

  std::uint8_t u8() {
    need(1, "truncated header");
    return bytes_[pos_++];
  }
  std::uint32_t u32(const char* what = "truncated header") {
    need(4, what);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) {
      v |= static_cast<std::uint32_t>(bytes_[pos_ + i]) << (8 * i);
    }
    pos_ += 4;
    return v;
  }
  float f32() { return std::bit_cast<float>(u32("truncated tensor payload")); }

  // Whole tensors are checked up front so truncation reports the tensor start.
  Eigen::MatrixXf matrix(Eigen::Index rows, Eigen::Index cols) {
    need(4 * static_cast<std::size_t>(rows * cols), "truncated tensor payload");
    Eigen::MatrixXf m(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r) {
      for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = f32();
    }
    return m;
  }
  Eigen::VectorXf vector(Eigen::Index size) {
    need(4 * static_cast<std::size_t>(size), "truncated tensor payload");
    Eigen::VectorXf v(size);
    for (Eigen::Index i = 0; i < size; ++i) v[i] = f32();
    return v;
  }

 private:
  void need(std::size_t n, const char* what) const {
    if (bytes_.size() - pos_ < n) throw FormatError(what, pos_);
  }

  std::span<const std::uint8_t> bytes_;
  std::uint64_t pos_ = 0;
};

}  // namespace

std::uint64_t sgw_file_size(const GeneratorShape& s) {
  const std::uint64_t d = s.latent_dim, c = s.channels, l = s.blocks;
  const std::uint64_t m = 2 * c;
  const std::uint64_t floats = kMappingLayers * (d * d + d) + l * (m * d + m) +
                               l * (9 * c * c) + l + (3 * c + 3) + 16 * c + d;
  return kSgwHeaderBytes + 4 * floats;
}

std::vector<std::uint8_t> encode_weights(const StyleWeights& weights) {
  weights.validate();
  const GeneratorShape& s = weights.shape;
  Writer w;
  for (char ch : kMagic) w.u8(static_cast<std::uint8_t>(ch));
  w.u8(kSgwVersion);
  w.u32(static_cast<std::uint32_t>(s.latent_dim));
  w.u32(static_cast<std::uint32_t>(s.style_dim()));
  w.u32(static_cast<std::uint32_t>(s.blocks));
  w.u32(static_cast<std::uint32_t>(s.channels));
  for (const DenseLayer& layer : weights.mapping) {
    w.matrix(layer.weight);
    w.vector(layer.bias);
  }
  for (const DenseLayer& a : weights.affine) {
    w.matrix(a.weight);
    w.vector(a.bias);
  }
  // C x 9C already matches (out, in, ky, kx) row-major order.
  for (const Eigen::MatrixXf& k : weights.conv) w.matrix(k);
  for (float n : weights.noise_scale) w.f32(n);
  w.matrix(weights.to_rgb);
  w.vector(weights.to_rgb_bias);
  w.matrix(weights.constant_input);
  w.vector(weights.w_mean);
  return w.take();
}

StyleWeights decode_weights(std::span<const std::uint8_t> bytes) {
  Reader r(bytes);
  for (char ch : kMagic) {
    if (r.u8() != static_cast<std::uint8_t>(ch)) {
      throw FormatError("bad magic, expected SGW1", 0);
    }
  }
  const std::uint8_t version = r.u8();
  if (version != kSgwVersion) {
    throw FormatError("unsupported SGW version " + std::to_string(version), 4);
  }
  const std::uint32_t d = r.u32();
  const std::uint32_t m = r.u32();
  const std::uint32_t l = r.u32();
  const std::uint32_t c = r.u32();
  if (d < 1 || d > 8192) throw FormatError("latent dimension out of range", 5);
  if (l < 1 || l > 8) throw FormatError("block count out of range", 13);
  if (c < 1 || c > 2048) throw FormatError("channel count out of range", 17);
  if (m != 2 * c) throw FormatError("style dimension must equal 2*C", 9);

  GeneratorShape shape{static_cast<int>(d), static_cast<int>(c),
                       static_cast<int>(l)};
  StyleWeights w;
  w.shape = shape;
  for (DenseLayer& layer : w.mapping) {
    layer.weight = r.matrix(d, d);
    layer.bias = r.vector(d);
  }
  for (std::uint32_t i = 0; i < l; ++i) {
    DenseLayer a;
    a.weight = r.matrix(m, d);
    a.bias = r.vector(m);
    w.affine.push_back(std::move(a));
  }
  for (std::uint32_t i = 0; i < l; ++i) w.conv.push_back(r.matrix(c, 9 * c));
  for (std::uint32_t i = 0; i < l; ++i) w.noise_scale.push_back(r.f32());
  w.to_rgb = r.matrix(3, c);
  w.to_rgb_bias = r.vector(3);
  w.constant_input = r.matrix(c, 16);
  w.w_mean = r.vector(d);
  if (r.offset() != bytes.size()) {
    throw FormatError("trailing bytes after payload", r.offset());
  }
  w.validate();
  return w;
}

void save_weights(const StyleWeights& weights,
                  const std::filesystem::path& path) {
  const std::vector<std::uint8_t> bytes = encode_weights(weights);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open for writing", path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write failed", path.string());
}

StyleWeights load_weights(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open for reading", path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  return decode_weights(bytes);
}

}  // namespace latentatlas
