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

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <vector>

#include "posekit/core/error.hpp"
#include "posekit/core/parallel.hpp"
#include "posekit/core/tensor.hpp"

namespace posekit::ops {

// Bilinear upsampling with align_corners = false: output index o reads input
// coordinate (o + 0.5) / scale - 0.5, clamped to the valid range. This is the
// interpolation baseline the transposed convolution is compared against.
inline Tensor bilinear_upsample(const Tensor& input, std::int64_t scale) {
  require_rank(input, 4, "upsample input");
  if (scale < 2) throw ConfigError("upsample scale must be >= 2, got " + std::to_string(scale));
  const std::size_t N = input.dim(0), C = input.dim(1), H = input.dim(2), W = input.dim(3);
  const std::size_t Ho = H * std::size_t(scale), Wo = W * std::size_t(scale);

  struct Tap {
    std::size_t i0, i1;
    double f;
  };
  auto taps = [scale](std::size_t out, std::size_t in) {
    std::vector<Tap> t(out);
    for (std::size_t o = 0; o < out; ++o) {
      double s = (double(o) + 0.5) / double(scale) - 0.5;
      s = std::clamp(s, 0.0, double(in - 1));
      const auto i0 = std::size_t(s);
      t[o] = {i0, std::min(i0 + 1, in - 1), s - double(i0)};
    }
    return t;
  };
  const auto ty = taps(Ho, H);
  const auto tx = taps(Wo, W);

  Tensor out({N, C, Ho, Wo});
  parallel_for(N * C, [&](std::size_t b, std::size_t e) {
    for (std::size_t nc = b; nc < e; ++nc) {
      const float* src = input.raw() + nc * H * W;
      float* dst = out.raw() + nc * Ho * Wo;
      for (std::size_t oh = 0; oh < Ho; ++oh) {
        const Tap& y = ty[oh];
        const float* r0 = src + y.i0 * W;
        const float* r1 = src + y.i1 * W;
        for (std::size_t ow = 0; ow < Wo; ++ow) {
          const Tap& x = tx[ow];
          const double v = (1 - y.f) * ((1 - x.f) * r0[x.i0] + x.f * r0[x.i1]) +
                           y.f * ((1 - x.f) * r1[x.i0] + x.f * r1[x.i1]);
          dst[oh * Wo + ow] = float(v);
        }
      }
    }
  });
  return out;
}

}  // namespace posekit::ops
