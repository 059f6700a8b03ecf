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

// Box-to-crop geometry and normalization.
//
// Pixel centres sit at integer coordinates. The crop transform maps crop
// point (u, v) to original point
//   x = cx + (u - W/2) * (bw / W),   y = cy + (v - H/2) * (bh / H)
// where (cx, cy) is the box centre and bw x bh the expanded box, padded to
// the crop's aspect ratio. The crop's outer corners (0, 0) and (W, H) land on
// the expanded box corners.

#include <array>
#include <cmath>
#include <cstddef>
#include <optional>
#include <string>

#include "posekit/core/error.hpp"
#include "posekit/core/tensor.hpp"
#include "posekit/decode/affine.hpp"
#include "posekit/pipeline/image.hpp"

namespace posekit::pipeline {

struct PersonBox {
  double x = 0.0;
  double y = 0.0;
  double w = 0.0;
  double h = 0.0;
  std::optional<double> score;

  PersonBox() = default;
  PersonBox(double x_, double y_, double w_, double h_, std::optional<double> score_ = {})
      : x(x_), y(y_), w(w_), h(h_), score(score_) {}

  void validate() const {
    if (!(w > 0.0) || !(h > 0.0) || !std::isfinite(x) || !std::isfinite(y) ||
        !std::isfinite(w) || !std::isfinite(h)) {
      throw InputError("person box must have finite coordinates and positive size, got [" +
                       std::to_string(x) + ", " + std::to_string(y) + ", " + std::to_string(w) +
                       ", " + std::to_string(h) + "]");
    }
  }
};

struct PreprocessSpec {
  std::size_t width = 256;
  std::size_t height = 256;
  std::array<double, 3> mean{0.485, 0.456, 0.406};
  std::array<double, 3> std{0.229, 0.224, 0.225};
  double expansion = 1.25;
  bool pad_to_aspect = true;  // false stretches the box to the crop

  void validate() const {
    if (width == 0 || height == 0) throw ConfigError("crop size must be positive");
    for (double s : std) {
      if (!(s > 0.0)) throw ConfigError("normalization std must be positive");
    }
    if (!(expansion > 0.0)) throw ConfigError("box expansion must be positive");
  }
};

// Expanded, aspect-corrected box as (x, y, w, h).
inline std::array<double, 4> expanded_box(const PersonBox& box, const PreprocessSpec& spec) {
  box.validate();
  spec.validate();
  const double cx = box.x + box.w / 2, cy = box.y + box.h / 2;
  double bw = box.w * spec.expansion, bh = box.h * spec.expansion;
  if (spec.pad_to_aspect) {
    const double aspect = double(spec.width) / double(spec.height);
    if (bw > bh * aspect) {
      bh = bw / aspect;
    } else {
      bw = bh * aspect;
    }
  }
  return {cx - bw / 2, cy - bh / 2, bw, bh};
}

// Transform taking crop coordinates to original-image coordinates.
inline decode::AffineTransform compute_affine(const PersonBox& box, const PreprocessSpec& spec) {
  const auto [ex, ey, bw, bh] = expanded_box(box, spec);
  const double sx = bw / double(spec.width), sy = bh / double(spec.height);
  return {sx, 0.0, ex, 0.0, sy, ey};
}

// Samples the crop: bilinear taps at the transformed pixel centres, values
// scaled to [0, 1], then (v - mean) / std per channel. Taps falling outside
// the image read the channel mean. Returns (1, 3, H, W).
inline Tensor preprocess(const Image& img, const decode::AffineTransform& t,
                         const PreprocessSpec& spec) {
  if (img.empty()) throw InputError("cannot preprocess an empty image");
  if (img.rgb.size() != img.width * img.height * 3) {
    throw InputError("image buffer size does not match its dimensions");
  }
  spec.validate();
  const std::size_t W = spec.width, H = spec.height;
  Tensor out({1, 3, H, W});
  const auto& m = t.matrix();
  const auto iw = std::ptrdiff_t(img.width), ih = std::ptrdiff_t(img.height);
  for (std::size_t v = 0; v < H; ++v) {
    for (std::size_t u = 0; u < W; ++u) {
      const double sx = m[0] * double(u) + m[1] * double(v) + m[2];
      const double sy = m[3] * double(u) + m[4] * double(v) + m[5];
      const double fx0 = std::floor(sx), fy0 = std::floor(sy);
      const double ax = sx - fx0, ay = sy - fy0;
      const auto x0 = std::ptrdiff_t(fx0), y0 = std::ptrdiff_t(fy0);
      const double wts[4] = {(1 - ax) * (1 - ay), ax * (1 - ay), (1 - ax) * ay, ax * ay};
      const std::ptrdiff_t xs[4] = {x0, x0 + 1, x0, x0 + 1};
      const std::ptrdiff_t ys[4] = {y0, y0, y0 + 1, y0 + 1};
      for (std::size_t c = 0; c < 3; ++c) {
        // Accumulated as deviations from the mean so mean-valued and
        // out-of-image taps contribute exactly zero.
        double acc = 0.0;
        for (int q = 0; q < 4; ++q) {
          if (wts[q] == 0.0) continue;
          const bool inside = xs[q] >= 0 && ys[q] >= 0 && xs[q] < iw && ys[q] < ih;
          if (!inside) continue;
          const double val = double(img.at(std::size_t(xs[q]), std::size_t(ys[q]), c)) / 255.0;
          acc += wts[q] * (val - spec.mean[c]);
        }
        out[(c * H + v) * W + u] = float(acc / spec.std[c]);
      }
    }
  }
  return out;
}

// Reverses the columns of every (N, C, H, W) plane.
inline Tensor mirror_columns(const Tensor& x) {
  require_rank(x, 4, "mirror input");
  Tensor out(x.shape());
  const std::size_t W = x.dim(3), rows = x.size() / W;
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < W; ++c) out[r * W + c] = x[r * W + W - 1 - c];
  return out;
}

}  // namespace posekit::pipeline
