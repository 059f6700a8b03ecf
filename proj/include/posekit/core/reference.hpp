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

// Deliberately naive kernels. They are slow, single-threaded, and exist as the
// ground truth that the optimized kernels in posekit/ops are tested against.

#include <algorithm>
#include <cstddef>
#include <cstdint>

#include "posekit/core/conv_params.hpp"
#include "posekit/core/tensor.hpp"

namespace posekit::reference {

// Direct convolution with zero padding. For each output element the sum runs
// cin (outer), kh, kw (inner) in ascending order, then bias is added, so the
// result is reproducible bit for bit.
inline Tensor naive_conv2d(const Tensor& input, const Tensor& weight,
                           const Tensor* bias, const ConvParams& p) {
  const Shape out_shape = conv_output_shape(input.shape(), weight.shape(), p);
  check_bias(bias, out_shape[1]);
  Tensor out(out_shape);

  const auto N = std::int64_t(input.dim(0)), Cin = std::int64_t(input.dim(1));
  const auto H = std::int64_t(input.dim(2)), W = std::int64_t(input.dim(3));
  const auto Cout = std::int64_t(weight.dim(0));
  const auto Kh = std::int64_t(weight.dim(2)), Kw = std::int64_t(weight.dim(3));
  const auto Ho = std::int64_t(out_shape[2]), Wo = std::int64_t(out_shape[3]);
  const std::int64_t cin_g = Cin / p.groups, cout_g = Cout / p.groups;

  for (std::int64_t n = 0; n < N; ++n) {
    for (std::int64_t co = 0; co < Cout; ++co) {
      const std::int64_t g = co / cout_g;
      for (std::int64_t oh = 0; oh < Ho; ++oh) {
        for (std::int64_t ow = 0; ow < Wo; ++ow) {
          float acc = 0.0f;
          for (std::int64_t ci = 0; ci < cin_g; ++ci) {
            for (std::int64_t kh = 0; kh < Kh; ++kh) {
              const std::int64_t ih = oh * p.stride.h - p.padding.h + kh * p.dilation.h;
              if (ih < 0 || ih >= H) continue;
              for (std::int64_t kw = 0; kw < Kw; ++kw) {
                const std::int64_t iw = ow * p.stride.w - p.padding.w + kw * p.dilation.w;
                if (iw < 0 || iw >= W) continue;
                acc += input.at(n, g * cin_g + ci, ih, iw) * weight.at(co, ci, kh, kw);
              }
            }
          }
          if (bias != nullptr) acc += (*bias)[co];
          out.at(n, co, oh, ow) = acc;
        }
      }
    }
  }
  return out;
}

// Transposed convolution built literally: insert (stride - 1) zeros between
// input samples, pad by (k - 1 - padding) on each side (plus output_padding at
// the bottom/right), then run naive_conv2d with the spatially flipped,
// channel-transposed kernel. Negative padding crops.
inline Tensor naive_deconv2d(const Tensor& input, const Tensor& weight,
                             const Tensor* bias, const DeconvParams& p) {
  const Shape out_shape = deconv_output_shape(input.shape(), weight.shape(), p);
  check_bias(bias, out_shape[1]);

  const auto N = std::int64_t(input.dim(0)), Cin = std::int64_t(input.dim(1));
  const auto H = std::int64_t(input.dim(2)), W = std::int64_t(input.dim(3));
  const auto Kh = std::int64_t(weight.dim(2)), Kw = std::int64_t(weight.dim(3));
  const std::int64_t G = p.groups;
  const std::int64_t cin_g = Cin / G;
  const auto cout_g = std::int64_t(weight.dim(1));
  const std::int64_t Cout = cout_g * G;

  const std::int64_t lead_h = Kh - 1 - p.padding.h, lead_w = Kw - 1 - p.padding.w;
  const std::int64_t dil_h = (H - 1) * p.stride.h + 1, dil_w = (W - 1) * p.stride.w + 1;
  const std::int64_t Hp = dil_h + 2 * lead_h + p.output_padding.h;
  const std::int64_t Wp = dil_w + 2 * lead_w + p.output_padding.w;

  // Zero-inserted, padded (or cropped) input.
  Tensor expanded({std::size_t(N), std::size_t(Cin), std::size_t(Hp), std::size_t(Wp)});
  for (std::int64_t n = 0; n < N; ++n) {
    for (std::int64_t c = 0; c < Cin; ++c) {
      for (std::int64_t h = 0; h < H; ++h) {
        const std::int64_t eh = h * p.stride.h + lead_h;
        if (eh < 0 || eh >= Hp) continue;
        for (std::int64_t w = 0; w < W; ++w) {
          const std::int64_t ew = w * p.stride.w + lead_w;
          if (ew < 0 || ew >= Wp) continue;
          expanded.at(n, c, eh, ew) = input.at(n, c, h, w);
        }
      }
    }
  }

  // (Cin, Cout/g, Kh, Kw) -> (Cout, Cin/g, Kh, Kw), flipped in both spatial axes.
  Tensor flipped({std::size_t(Cout), std::size_t(cin_g), std::size_t(Kh), std::size_t(Kw)});
  for (std::int64_t g = 0; g < G; ++g) {
    for (std::int64_t ci = 0; ci < cin_g; ++ci) {
      for (std::int64_t co = 0; co < cout_g; ++co) {
        for (std::int64_t kh = 0; kh < Kh; ++kh) {
          for (std::int64_t kw = 0; kw < Kw; ++kw) {
            flipped.at(g * cout_g + co, ci, kh, kw) =
                weight.at(g * cin_g + ci, co, Kh - 1 - kh, Kw - 1 - kw);
          }
        }
      }
    }
  }

  ConvParams cp;
  cp.groups = G;
  Tensor out = naive_conv2d(expanded, flipped, bias, cp);
  if (out.shape() != out_shape) {
    throw DimensionError("internal: deconv output " + shape_str(out.shape()) +
                         " differs from closed form " + shape_str(out_shape));
  }
  return out;
}

// Bilinear upsampling, align_corners = false: output index o samples input
// coordinate (o + 0.5) / scale - 0.5, clamped to [0, in - 1].
inline Tensor naive_bilinear_upsample(const Tensor& input, std::int64_t scale) {
  require_rank(input, 4, "upsample input");
  if (scale < 2) throw ConfigError("upsample scale must be >= 2");
  const std::size_t N = input.dim(0), C = input.dim(1), H = input.dim(2), W = input.dim(3);
  const std::size_t Ho = H * std::size_t(scale), Wo = W * std::size_t(scale);
  Tensor out({N, C, Ho, Wo});
  for (std::size_t n = 0; n < N; ++n) {
    for (std::size_t c = 0; c < C; ++c) {
      for (std::size_t oh = 0; oh < Ho; ++oh) {
        for (std::size_t ow = 0; ow < Wo; ++ow) {
          double sy = (double(oh) + 0.5) / double(scale) - 0.5;
          double sx = (double(ow) + 0.5) / double(scale) - 0.5;
          sy = std::clamp(sy, 0.0, double(H - 1));
          sx = std::clamp(sx, 0.0, double(W - 1));
          const auto y0 = std::size_t(sy), x0 = std::size_t(sx);
          const std::size_t y1 = std::min(y0 + 1, H - 1), x1 = std::min(x0 + 1, W - 1);
          const double fy = sy - double(y0), fx = sx - double(x0);
          const double v = (1 - fy) * ((1 - fx) * input.at(n, c, y0, x0) + fx * input.at(n, c, y0, x1)) +
                           fy * ((1 - fx) * input.at(n, c, y1, x0) + fx * input.at(n, c, y1, x1));
          out.at(n, c, oh, ow) = float(v);
        }
      }
    }
  }
  return out;
}

}  // namespace posekit::reference
