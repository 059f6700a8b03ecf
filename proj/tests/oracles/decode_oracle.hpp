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
#include <vector>

#include "posekit/core/tensor.hpp"

namespace oracle {

// First index whose value no other index exceeds.
inline std::size_t scan_argmax(const std::vector<float>& v) {
  for (std::size_t i = 0; i < v.size(); ++i) {
    bool is_max = true;
    for (std::size_t j = 0; j < v.size(); ++j) is_max = is_max && !(v[j] > v[i]);
    if (is_max) return i;
  }
  return v.size();
}

// Unnormalized isotropic Gaussian sampled at integer pixel centres, (1, H, W).
inline posekit::Tensor gaussian_map(std::size_t H, std::size_t W, double cx, double cy,
                                    double sigma) {
  posekit::Tensor t({1, H, W});
  for (std::size_t y = 0; y < H; ++y)
    for (std::size_t x = 0; x < W; ++x) {
      const double dx = double(x) - cx, dy = double(y) - cy;
      t[y * W + x] = float(std::exp(-(dx * dx + dy * dy) / (2 * sigma * sigma)));
    }
  return t;
}

}  // namespace oracle
