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

#include <cmath>
#include <cstddef>
#include <span>
#include <string>

#include "posekit/core/error.hpp"
#include "posekit/core/tensor.hpp"
#include "posekit/decode/prediction.hpp"

namespace posekit::decode {

// One sample's SimCC vectors: x is (K, W*k), y is (K, H*k) for a W x H crop.
struct SimccOutput {
  Tensor x;
  Tensor y;
  std::size_t split_factor = 1;
  std::size_t width = 0;
  std::size_t height = 0;

  SimccOutput() = default;
  SimccOutput(Tensor ox, Tensor oy, std::size_t k, std::size_t w, std::size_t h)
      : x(std::move(ox)), y(std::move(oy)), split_factor(k), width(w), height(h) {
    validate();
  }

  std::size_t keypoints() const { return x.dim(0); }

  void validate() const {
    if (split_factor == 0) throw ConfigError("splitting factor k must be >= 1");
    require_rank(x, 2, "simcc x");
    require_rank(y, 2, "simcc y");
    if (x.dim(0) != y.dim(0)) {
      throw DimensionError("simcc x has " + std::to_string(x.dim(0)) + " keypoints but y has " +
                           std::to_string(y.dim(0)));
    }
    if (x.dim(1) != width * split_factor || y.dim(1) != height * split_factor) {
      throw DimensionError("simcc vector lengths " + std::to_string(x.dim(1)) + ", " +
                           std::to_string(y.dim(1)) + " do not equal extent*k for a " +
                           std::to_string(width) + "x" + std::to_string(height) +
                           " crop with k=" + std::to_string(split_factor));
    }
  }
};

// Slices sample n out of batched (N, K, L) head vectors.
inline SimccOutput simcc_sample(const Tensor& ox, const Tensor& oy, std::size_t n, std::size_t k) {
  require_rank(ox, 3, "simcc x");
  require_rank(oy, 3, "simcc y");
  const std::size_t K = ox.dim(1), Lx = ox.dim(2), Ly = oy.dim(2);
  if (n >= ox.dim(0) || n >= oy.dim(0)) throw DimensionError("simcc batch index out of range");
  if (k == 0 || Lx % k || Ly % k) throw DimensionError("simcc vector length not divisible by k");
  std::vector<float> xs(ox.raw() + n * K * Lx, ox.raw() + (n + 1) * K * Lx);
  std::vector<float> ys(oy.raw() + n * K * Ly, oy.raw() + (n + 1) * K * Ly);
  return SimccOutput(Tensor({K, Lx}, std::move(xs)), Tensor({oy.dim(1), Ly}, std::move(ys)), k,
                     Lx / k, Ly / k);
}

// Lowest index among the maxima.
inline std::size_t argmax(std::span<const float> v) {
  if (v.empty()) throw DimensionError("argmax of an empty vector");
  std::size_t best = 0;
  for (std::size_t i = 1; i < v.size(); ++i) {
    if (v[i] > v[best]) best = i;
  }
  return best;
}

// Softmax probability at the argmax: 1 / sum_i exp(v_i - max).
inline double softmax_peak(std::span<const float> v) {
  if (v.empty()) throw DimensionError("softmax of an empty vector");
  const float m = v[argmax(v)];
  double z = 0.0;
  for (float e : v) z += std::exp(double(e) - double(m));
  return 1.0 / z;
}

// Coordinate of one vector: argmax / k.
inline double simcc_coordinate(std::span<const float> v, std::size_t k) {
  if (k == 0) throw ConfigError("splitting factor k must be >= 1");
  return double(argmax(v)) / double(k);
}

inline PosePrediction simcc_decode(const SimccOutput& out) {
  out.validate();
  const std::size_t K = out.keypoints(), Lx = out.x.dim(1), Ly = out.y.dim(1);
  PosePrediction p;
  p.frame = Frame::crop;
  p.keypoints.resize(K);
  for (std::size_t j = 0; j < K; ++j) {
    std::span<const float> vx(out.x.raw() + j * Lx, Lx), vy(out.y.raw() + j * Ly, Ly);
    p.keypoints[j] = {simcc_coordinate(vx, out.split_factor),
                      simcc_coordinate(vy, out.split_factor),
                      softmax_peak(vx) * softmax_peak(vy)};
  }
  return p;
}

}  // namespace posekit::decode
