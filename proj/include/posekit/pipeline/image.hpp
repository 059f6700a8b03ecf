// Copyright 2026 The Posekit Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

// 8-bit RGB images and binary PPM (P6) I/O.

#include <cctype>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <string>
#include <vector>

#include "posekit/core/error.hpp"

namespace posekit::pipeline {

struct Image {
  std::size_t width = 0;
  std::size_t height = 0;
  std::vector<std::uint8_t> rgb;  // row-major, interleaved R G B

  Image() = default;
  Image(std::size_t w, std::size_t h, std::uint8_t fill = 0) : width(w), height(h), rgb(w * h * 3, fill) {}

  bool empty() const { return width == 0 || height == 0 || rgb.empty(); }
  std::uint8_t& at(std::size_t x, std::size_t y, std::size_t c) { return rgb[(y * width + x) * 3 + c]; }
  std::uint8_t at(std::size_t x, std::size_t y, std::size_t c) const {
    return rgb[(y * width + x) * 3 + c];
  }
  bool operator==(const Image&) const = default;
};

namespace detail {

// Skips whitespace and '#' comments, then reads one unsigned decimal field.
inline std::size_t ppm_field(const std::string& s, std::size_t& pos, const char* what) {
  while (pos < s.size()) {
    if (s[pos] == '#') {
      while (pos < s.size() && s[pos] != '\n') ++pos;
    } else if (std::isspace(static_cast<unsigned char>(s[pos]))) {
      ++pos;
    } else {
      break;
    }
  }
  std::size_t v = 0, digits = 0;
  while (pos < s.size() && std::isdigit(static_cast<unsigned char>(s[pos]))) {
    v = v * 10 + std::size_t(s[pos++] - '0');
    if (++digits > 9) throw InputError(std::string("PPM ") + what + " is too large");
  }
  if (digits == 0) throw InputError(std::string("PPM header is missing the ") + what);
  return v;
}

}  // namespace detail

inline Image decode_ppm(const std::string& bytes, const std::string& source = "<memory>") {
  if (bytes.size() < 2 || bytes[0] != 'P' || bytes[1] != '6') {
    throw InputError("'" + source + "' is not a binary PPM (P6) image");
  }
  std::size_t pos = 2;
  const std::size_t w = detail::ppm_field(bytes, pos, "width");
  const std::size_t h = detail::ppm_field(bytes, pos, "height");
  const std::size_t maxval = detail::ppm_field(bytes, pos, "maxval");
  if (w == 0 || h == 0) throw InputError("'" + source + "' is an empty image");
  if (maxval != 255) {
    throw InputError("'" + source + "' has maxval " + std::to_string(maxval) +
                     "; only 8-bit (255) PPM is supported");
  }
  if (pos >= bytes.size() || !std::isspace(static_cast<unsigned char>(bytes[pos]))) {
    throw InputError("'" + source + "' has a malformed PPM header");
  }
  ++pos;
  const std::size_t n = w * h * 3;
  if (bytes.size() - pos < n) {
    throw InputError("'" + source + "' is truncated: expected " + std::to_string(n) +
                     " pixel bytes, found " + std::to_string(bytes.size() - pos));
  }
  Image img;
  img.width = w;
  img.height = h;
  img.rgb.assign(bytes.begin() + std::ptrdiff_t(pos), bytes.begin() + std::ptrdiff_t(pos + n));
  return img;
}

inline std::string encode_ppm(const Image& img) {
  if (img.empty()) throw InputError("cannot encode an empty image");
  std::string out = "P6\n" + std::to_string(img.width) + " " + std::to_string(img.height) + "\n255\n";
  out.append(img.rgb.begin(), img.rgb.end());
  return out;
}

inline Image read_ppm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open image '" + path.string() + "'");
  const std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return decode_ppm(bytes, path.string());
}

inline void write_ppm(const std::filesystem::path& path, const Image& img) {
  const std::string bytes = encode_ppm(img);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out.write(bytes.data(), std::streamsize(bytes.size()));
  if (!out) throw InputError("cannot write image '" + path.string() + "'");
}

}  // namespace posekit::pipeline
