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

// Test-only second implementation of direct convolution. It materializes the
// zero-padded input first and then walks flat indices, sharing no code with
// posekit::reference::naive_conv2d. Summation order (cin, kh, kw, bias last)
// matches the reference so results can be compared for exact equality.

#include <cstddef>
#include <vector>

#include "posekit/core/tensor.hpp"

namespace oracle {

struct Conv2dSpec {
  std::size_t stride_h = 1, stride_w = 1, pad_h = 0, pad_w = 0, groups = 1;
};

inline posekit::Tensor conv2d_flat(const posekit::Tensor& x, const posekit::Tensor& w,
                                   const std::vector<float>* bias, const Conv2dSpec& s) {
  const auto& xs = x.shape();
  const auto& ws = w.shape();
  const std::size_t N = xs[0], C = xs[1], H = xs[2], W = xs[3];
  const std::size_t O = ws[0], Cg = ws[1], KH = ws[2], KW = ws[3];
  const std::size_t Hp = H + 2 * s.pad_h, Wp = W + 2 * s.pad_w;
  std::vector<float> padded(N * C * Hp * Wp, 0.0f);
  for (std::size_t i = 0; i < N * C * H * W; ++i) {
    const std::size_t col = i % W, row = (i / W) % H, nc = i / (W * H);
    padded[nc * Hp * Wp + (row + s.pad_h) * Wp + (col + s.pad_w)] = x[i];
  }
  const std::size_t HO = (Hp - KH) / s.stride_h + 1, WO = (Wp - KW) / s.stride_w + 1;
  const std::size_t Og = O / s.groups;
  std::vector<float> out(N * O * HO * WO);
  for (std::size_t idx = 0; idx < out.size(); ++idx) {
    const std::size_t ox = idx % WO, oy = (idx / WO) % HO, o = (idx / (WO * HO)) % O,
                      n = idx / (WO * HO * O);
    const std::size_t c0 = (o / Og) * Cg;
    float acc = 0.0f;
    for (std::size_t c = 0; c < Cg; ++c) {
      for (std::size_t ky = 0; ky < KH; ++ky) {
        for (std::size_t kx = 0; kx < KW; ++kx) {
          const std::size_t py = oy * s.stride_h + ky, px = ox * s.stride_w + kx;
          acc += padded[((n * C + c0 + c) * Hp + py) * Wp + px] *
                 w[((o * Cg + c) * KH + ky) * KW + kx];
        }
      }
    }
    if (bias != nullptr) acc += (*bias)[o];
    out[idx] = acc;
  }
  return posekit::Tensor({N, O, HO, WO}, std::move(out));
}

}  // namespace oracle
