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

// Flip-test fusion. The flipped pass sees the horizontally mirrored crop, so
// its outputs are mirrored back (x-vectors and heatmap columns reversed),
// left/right keypoint channels are swapped, and the result is averaged with
// the plain pass.

#include <algorithm>
#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "posekit/core/error.hpp"
#include "posekit/core/tensor.hpp"
#include "posekit/decode/simcc.hpp"

namespace posekit::decode {

using FlipPairs = std::vector<std::pair<std::size_t, std::size_t>>;

// Channel permutation implied by the pairs; every index may appear once.
inline std::vector<std::size_t> flip_permutation(const FlipPairs& pairs, std::size_t keypoints) {
  std::vector<std::size_t> perm(keypoints);
  for (std::size_t i = 0; i < keypoints; ++i) perm[i] = i;
  std::vector<bool> used(keypoints, false);
  for (const auto& [a, b] : pairs) {
    if (a >= keypoints || b >= keypoints) {
      throw ConfigError("flip pair (" + std::to_string(a) + ", " + std::to_string(b) +
                        ") out of range for " + std::to_string(keypoints) + " keypoints");
    }
    if (used[a] || used[b] || a == b) {
      throw ConfigError("flip pair (" + std::to_string(a) + ", " + std::to_string(b) +
                        ") repeats a keypoint");
    }
    used[a] = used[b] = true;
    perm[a] = b;
    perm[b] = a;
  }
  return perm;
}

namespace detail {

// out[j, ...] = 0.5 * (a[j, ...] + mirror(b[perm[j], ...])) over rows of `cols`.
inline Tensor fuse_rows(const Tensor& a, const Tensor& b, const std::vector<std::size_t>& perm,
                        std::size_t rows_per_channel, std::size_t cols, bool reverse) {
  Tensor out(a.shape());
  const std::size_t K = perm.size(), plane = rows_per_channel * cols;
  for (std::size_t j = 0; j < K; ++j) {
    const float* pa = a.raw() + j * plane;
    const float* pb = b.raw() + perm[j] * plane;
    float* po = out.raw() + j * plane;
    for (std::size_t r = 0; r < rows_per_channel; ++r) {
      for (std::size_t c = 0; c < cols; ++c) {
        const float mirrored = pb[r * cols + (reverse ? cols - 1 - c : c)];
        po[r * cols + c] = 0.5f * (pa[r * cols + c] + mirrored);
      }
    }
  }
  return out;
}

}  // namespace detail

inline SimccOutput flip_fuse(const SimccOutput& pred, const SimccOutput& flipped,
                             const FlipPairs& pairs) {
  pred.validate();
  flipped.validate();
  if (pred.x.shape() != flipped.x.shape() || pred.y.shape() != flipped.y.shape() ||
      pred.split_factor != flipped.split_factor) {
    throw DimensionError("flip_fuse operands differ in shape");
  }
  const auto perm = flip_permutation(pairs, pred.keypoints());
  SimccOutput out = pred;
  out.x = detail::fuse_rows(pred.x, flipped.x, perm, 1, pred.x.dim(1), true);
  out.y = detail::fuse_rows(pred.y, flipped.y, perm, 1, pred.y.dim(1), false);
  return out;
}

// heatmaps: (K, H, W) or (1, K, H, W).
inline Tensor flip_fuse(const Tensor& pred, const Tensor& flipped, const FlipPairs& pairs) {
  if (pred.shape() != flipped.shape()) throw DimensionError("flip_fuse operands differ in shape");
  const std::size_t r = pred.rank();
  if (r != 3 && !(r == 4 && pred.dim(0) == 1)) {
    throw DimensionError("flip_fuse expects (K, H, W) heatmaps, got " + shape_str(pred.shape()));
  }
  const auto perm = flip_permutation(pairs, pred.dim(r - 3));
  return detail::fuse_rows(pred, flipped, perm, pred.dim(r - 2), pred.dim(r - 1), true);
}

// Horizontal mirror plus channel swap; the inverse of what fusion undoes.
inline SimccOutput mirror(const SimccOutput& s, const FlipPairs& pairs) {
  const auto perm = flip_permutation(pairs, s.keypoints());
  SimccOutput out = s;
  const std::size_t Lx = s.x.dim(1), Ly = s.y.dim(1);
  for (std::size_t j = 0; j < perm.size(); ++j) {
    for (std::size_t i = 0; i < Lx; ++i) out.x[j * Lx + i] = s.x[perm[j] * Lx + Lx - 1 - i];
    for (std::size_t i = 0; i < Ly; ++i) out.y[j * Ly + i] = s.y[perm[j] * Ly + i];
  }
  return out;
}

inline Tensor mirror(const Tensor& heatmaps, const FlipPairs& pairs) {
  const std::size_t r = heatmaps.rank();
  if (r != 3 && !(r == 4 && heatmaps.dim(0) == 1)) {
    throw DimensionError("mirror expects (K, H, W) heatmaps");
  }
  const std::size_t K = heatmaps.dim(r - 3), H = heatmaps.dim(r - 2), W = heatmaps.dim(r - 1);
  const auto perm = flip_permutation(pairs, K);
  Tensor out(heatmaps.shape());
  for (std::size_t j = 0; j < K; ++j)
    for (std::size_t y = 0; y < H; ++y)
      for (std::size_t x = 0; x < W; ++x)
        out[(j * H + y) * W + x] = heatmaps[(perm[j] * H + y) * W + W - 1 - x];
  return out;
}

}  // namespace posekit::decode
