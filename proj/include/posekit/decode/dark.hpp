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

// Heatmap decode by weighted average around the peak.
//
// For each keypoint map:
//   1. argmax (lowest flat index on ties) and its value m; score = clamp(m, 0, 1)
//   2. peak width from the 3x3 log-curvature at the argmax, per axis:
//        ln(left) + ln(right) - 2 ln(centre) = -1 / sigma^2
//      sigma_hat is the larger of the two axis estimates. A missing or
//      non-positive neighbour means there is no measurable spread.
//   3. window radius R = max(1, ceil(3.5 * sigma_hat)), or 1 without spread
//   4. coordinate = sum p * max(h(p), 0) / sum max(h(p), 0) over the window,
//      scaled by the heatmap stride
// An all-non-positive map reports the argmax with score 0.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>

#include "posekit/core/error.hpp"
#include "posekit/core/tensor.hpp"
#include "posekit/decode/prediction.hpp"

namespace posekit::decode {

inline constexpr double kDarkWindowSigmas = 3.5;

struct HeatmapPeak {
  std::size_t x = 0;
  std::size_t y = 0;
  float value = 0.0f;
};

inline HeatmapPeak heatmap_argmax(const float* map, std::size_t H, std::size_t W) {
  HeatmapPeak p{0, 0, map[0]};
  for (std::size_t i = 1; i < H * W; ++i) {
    if (map[i] > p.value) p = {i % W, i / W, map[i]};
  }
  return p;
}

namespace detail {

// sigma^2 from three log-samples, or nullopt if not a strict local peak.
inline std::optional<double> curvature_sigma2(float l, float c, float r) {
  if (l <= 0.0f || c <= 0.0f || r <= 0.0f) return std::nullopt;
  const double curv = std::log(double(l)) + std::log(double(r)) - 2.0 * std::log(double(c));
  if (!(curv < 0.0)) return std::nullopt;
  return -1.0 / curv;
}

}  // namespace detail

// Window radius in bins for the peak at p.
inline std::size_t dark_window_radius(const float* map, std::size_t H, std::size_t W,
                                      const HeatmapPeak& p) {
  std::optional<double> sx, sy;
  const float c = map[p.y * W + p.x];
  if (p.x > 0 && p.x + 1 < W) {
    sx = detail::curvature_sigma2(map[p.y * W + p.x - 1], c, map[p.y * W + p.x + 1]);
  }
  if (p.y > 0 && p.y + 1 < H) {
    sy = detail::curvature_sigma2(map[(p.y - 1) * W + p.x], c, map[(p.y + 1) * W + p.x]);
  }
  if (!sx || !sy) return 1;
  const double sigma = std::sqrt(std::max(*sx, *sy));
  const double r = std::ceil(kDarkWindowSigmas * sigma);
  return std::size_t(std::clamp(r, 1.0, double(std::max(H, W))));
}

// Decodes one (H, W) map into crop pixels.
inline Keypoint dark_decode_map(const float* map, std::size_t H, std::size_t W,
                                double stride) {
  const HeatmapPeak p = heatmap_argmax(map, H, W);
  if (!(p.value > 0.0f)) {
    return {double(p.x) * stride, double(p.y) * stride, 0.0};
  }
  const std::size_t R = dark_window_radius(map, H, W, p);
  const std::size_t x0 = p.x >= R ? p.x - R : 0, x1 = std::min(W - 1, p.x + R);
  const std::size_t y0 = p.y >= R ? p.y - R : 0, y1 = std::min(H - 1, p.y + R);
  double sw = 0.0, sx = 0.0, sy = 0.0;
  for (std::size_t y = y0; y <= y1; ++y) {
    for (std::size_t x = x0; x <= x1; ++x) {
      const double w = std::max(0.0f, map[y * W + x]);
      sw += w;
      sx += w * double(x);
      sy += w * double(y);
    }
  }
  const double score = std::clamp(double(p.value), 0.0, 1.0);
  return {sx / sw * stride, sy / sw * stride, score};
}

// heatmaps: (K, H, W) or (1, K, H, W).
inline PosePrediction dark_decode(const Tensor& heatmaps, double stride) {
  if (!(stride > 0.0)) throw ConfigError("heatmap stride must be positive");
  std::size_t K, H, W;
  if (heatmaps.rank() == 3) {
    K = heatmaps.dim(0), H = heatmaps.dim(1), W = heatmaps.dim(2);
  } else if (heatmaps.rank() == 4 && heatmaps.dim(0) == 1) {
    K = heatmaps.dim(1), H = heatmaps.dim(2), W = heatmaps.dim(3);
  } else {
    throw DimensionError("dark_decode expects (K, H, W) heatmaps, got " +
                         shape_str(heatmaps.shape()));
  }
  PosePrediction out;
  out.frame = Frame::crop;
  out.keypoints.resize(K);
  for (std::size_t j = 0; j < K; ++j) {
    out.keypoints[j] = dark_decode_map(heatmaps.raw() + j * H * W, H, W, stride);
  }
  return out;
}

}  // namespace posekit::decode
