/* Copyright 2026 The CPDM Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#include "cpdm/image_io.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <iterator>
#include <sstream>

#include "cpdm/error.hpp"

namespace cpdm {
namespace {

// Netpbm header token, skipping whitespace and '#' comments.
std::size_t header_number(const std::string& bytes, std::size_t& pos) {
  for (;;) {
    while (pos < bytes.size() && std::isspace(static_cast<unsigned char>(bytes[pos]))) ++pos;
    if (pos < bytes.size() && bytes[pos] == '#') {
      while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
      continue;
    }
    break;
  }
  std::size_t start = pos;
  std::size_t value = 0;
  while (pos < bytes.size() && std::isdigit(static_cast<unsigned char>(bytes[pos]))) {
    value = value * 10 + static_cast<std::size_t>(bytes[pos] - '0');
    if (value > (1u << 24)) throw FormatError("PPM header value too large");
    ++pos;
  }
  if (pos == start) throw FormatError("malformed PPM header");
  return value;
}

}  // namespace

Tensor read_ppm(const std::string& bytes) {
  if (bytes.size() < 2 || bytes[0] != 'P' || bytes[1] != '6') {
    throw FormatError("not a binary PPM (P6) image");
  }
  std::size_t pos = 2;
  const std::size_t width = header_number(bytes, pos);
  const std::size_t height = header_number(bytes, pos);
  const std::size_t maxval = header_number(bytes, pos);
  if (width == 0 || height == 0) throw FormatError("PPM has zero size");
  if (maxval == 0 || maxval > 65535) throw FormatError("PPM maxval out of range");
  if (pos >= bytes.size() || !std::isspace(static_cast<unsigned char>(bytes[pos]))) {
    throw FormatError("malformed PPM header");
  }
  ++pos;
  const std::size_t sample_bytes = maxval > 255 ? 2 : 1;
  const std::size_t need = width * height * 3 * sample_bytes;
  if (bytes.size() - pos < need) {
    throw FormatError("truncated PPM payload: expected " + std::to_string(need) + " bytes, got " +
                      std::to_string(bytes.size() - pos));
  }
  Tensor img({3, height, width});
  const double scale = 1.0 / static_cast<double>(maxval);
  for (std::size_t y = 0; y < height; ++y) {
    for (std::size_t x = 0; x < width; ++x) {
      for (std::size_t c = 0; c < 3; ++c) {
        std::size_t v = static_cast<unsigned char>(bytes[pos]);
        if (sample_bytes == 2) v = (v << 8) | static_cast<unsigned char>(bytes[pos + 1]);
        pos += sample_bytes;
        if (v > maxval) throw ValidationError("PPM sample exceeds maxval");
        img.at(c, y, x) = static_cast<float>(static_cast<double>(v) * scale);
      }
    }
  }
  return img;
}

Tensor load_ppm(const std::filesystem::path& path) { return read_ppm(read_file(path)); }

std::string write_ppm(const Tensor& image) {
  if (image.rank() != 3 || image.dim(0) != 3) {
    throw ShapeError("PPM output needs a [3, H, W] image");
  }
  const std::size_t h = image.dim(1);
  const std::size_t w = image.dim(2);
  std::string out = "P6\n" + std::to_string(w) + " " + std::to_string(h) + "\n255\n";
  out.reserve(out.size() + 3 * h * w);
  for (std::size_t y = 0; y < h; ++y) {
    for (std::size_t x = 0; x < w; ++x) {
      for (std::size_t c = 0; c < 3; ++c) {
        const double v = std::clamp(static_cast<double>(image.at(c, y, x)), 0.0, 1.0);
        out.push_back(static_cast<char>(static_cast<std::uint8_t>(std::lround(v * 255.0))));
      }
    }
  }
  return out;
}

std::string write_pgm(std::size_t width, std::size_t height, const std::vector<std::uint8_t>& pixels,
                      const std::string& comment) {
  if (pixels.size() != width * height) throw ShapeError("PGM pixel count does not match size");
  std::string out = "P5\n";
  if (!comment.empty()) out += "# " + comment + "\n";
  out += std::to_string(width) + " " + std::to_string(height) + "\n255\n";
  out.append(pixels.begin(), pixels.end());
  return out;
}

void write_file(const std::filesystem::path& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write failed for " + path.string());
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

}  // namespace cpdm
