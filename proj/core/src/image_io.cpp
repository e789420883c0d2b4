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

#include "latentatlas/image_io.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <memory>

#include "latentatlas/errors.hpp"

namespace latentatlas {

Image Image::filled(int height, int width, double r, double g, double b) {
  Image img;
  img.height = height;
  img.width = width;
  img.pixels.resize(3, height * width);
  img.pixels.row(0).setConstant(r);
  img.pixels.row(1).setConstant(g);
  img.pixels.row(2).setConstant(b);
  return img;
}

std::vector<std::uint8_t> Image::to_rgb8() const {
  std::vector<std::uint8_t> out(static_cast<std::size_t>(3 * pixel_count()));
  for (int p = 0; p < pixel_count(); ++p) {
    for (int c = 0; c < 3; ++c) {
      const double v = std::clamp(pixels(c, p), 0.0, 1.0);
      out[3 * p + c] = static_cast<std::uint8_t>(std::lround(v * 255.0));
    }
  }
  return out;
}

Image Image::from_rgb8(int height, int width,
                       const std::vector<std::uint8_t>& rgb) {
  if (rgb.size() != static_cast<std::size_t>(3 * height * width)) {
    throw InvalidDimension("RGB buffer size does not match image size");
  }
  Image img;
  img.height = height;
  img.width = width;
  img.pixels.resize(3, height * width);
  for (int p = 0; p < height * width; ++p) {
    for (int c = 0; c < 3; ++c) img.pixels(c, p) = rgb[3 * p + c] / 255.0;
  }
  return img;
}

const char* to_string(Provenance p) {
  return p == Provenance::kReal ? "real" : "generated";
}

namespace {

struct PngWriteState {
  png_structp png = nullptr;
  png_infop info = nullptr;
  ~PngWriteState() { png_destroy_write_struct(&png, &info); }
};

void append_bytes(png_structp png, png_bytep data, png_size_t length) {
  auto* out = static_cast<std::vector<std::uint8_t>*>(png_get_io_ptr(png));
  out->insert(out->end(), data, data + length);
}

void no_flush(png_structp) {}

}  // namespace

std::vector<std::uint8_t> encode_png(const Image& image) {
  std::vector<std::uint8_t> rgb = image.to_rgb8();
  std::vector<std::uint8_t> out;
  PngWriteState s;
  s.png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr,
                                  nullptr);
  if (!s.png) throw Error("png_create_write_struct failed");
  s.info = png_create_info_struct(s.png);
  if (!s.info) throw Error("png_create_info_struct failed");
  if (setjmp(png_jmpbuf(s.png))) throw Error("PNG encoding failed");
  png_set_write_fn(s.png, &out, append_bytes, no_flush);
  png_set_IHDR(s.png, s.info, static_cast<png_uint_32>(image.width),
               static_cast<png_uint_32>(image.height), 8, PNG_COLOR_TYPE_RGB,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
               PNG_FILTER_TYPE_DEFAULT);
  png_write_info(s.png, s.info);
  for (int y = 0; y < image.height; ++y) {
    png_write_row(s.png, rgb.data() + static_cast<std::size_t>(3 * y * image.width));
  }
  png_write_end(s.png, nullptr);
  return out;
}

void write_png(const Image& image, const std::filesystem::path& path) {
  const std::vector<std::uint8_t> bytes = encode_png(image);
  std::unique_ptr<FILE, int (*)(FILE*)> f(std::fopen(path.c_str(), "wb"),
                                          &std::fclose);
  if (!f) throw IoError("cannot open for writing", path.string());
  if (std::fwrite(bytes.data(), 1, bytes.size(), f.get()) != bytes.size()) {
    throw IoError("write failed", path.string());
  }
}

Image read_png(const std::filesystem::path& path) {
  png_image img{};
  img.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&img, path.c_str())) {
    throw IoError(std::string("cannot decode PNG (") + img.message + ")",
                  path.string());
  }
  img.format = PNG_FORMAT_RGB;
  std::vector<std::uint8_t> rgb(PNG_IMAGE_SIZE(img));
  if (!png_image_finish_read(&img, nullptr, rgb.data(), 0, nullptr)) {
    png_image_free(&img);
    throw IoError(std::string("cannot decode PNG (") + img.message + ")",
                  path.string());
  }
  return Image::from_rgb8(static_cast<int>(img.height),
                          static_cast<int>(img.width), rgb);
}

}  // namespace latentatlas
