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
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "posekit/core/conv_params.hpp"
#include "posekit/core/error.hpp"
#include "posekit/core/parallel.hpp"
#include "posekit/core/tensor.hpp"
#include "posekit/ops/activation.hpp"
#include "posekit/ops/gemm.hpp"

namespace posekit::ops {

// Convolution weights with batch norm already multiplied in. For conv the
// weight is (Cout, Cin/groups, Kh, Kw); for deconv (Cin, Cout/groups, Kh, Kw).
// bias always has one entry per output channel.
struct FoldedConv {
  Tensor weight;
  Tensor bias;

  static FoldedConv without_bn(Tensor weight, std::size_t out_channels,
                               const Tensor* bias = nullptr) {
    Tensor b({out_channels}, 0.0f);
    if (bias != nullptr) {
      check_bias(bias, out_channels);
      b = bias->reshaped({out_channels});
    }
    return {std::move(weight), std::move(b)};
  }
};

namespace detail {

inline void check_bn_lengths(std::size_t cout, std::span<const float> bias,
                             std::span<const float> mean, std::span<const float> var,
                             std::span<const float> gamma, std::span<const float> beta) {
  auto check = [cout](std::size_t n, const char* name) {
    if (n != cout) {
      throw DimensionError(std::string("batch-norm ") + name + " has length " +
                           std::to_string(n) + ", expected " + std::to_string(cout));
    }
  };
  if (!bias.empty()) check(bias.size(), "bias");
  check(mean.size(), "mean");
  check(var.size(), "var");
  check(gamma.size(), "gamma");
  check(beta.size(), "beta");
  for (float v : var) {
    if (!(v >= 0.0f)) throw ConfigError("batch-norm variance must be >= 0");
  }
}

}  // namespace detail

// weight[c] *= gamma[c] / sqrt(var[c] + eps);
// bias[c] = (bias[c] - mean[c]) * gamma[c] / sqrt(var[c] + eps) + beta[c].
// An empty bias span means the convolution had no bias.
inline FoldedConv fold_batchnorm(const Tensor& weight, std::span<const float> bias,
                                 std::span<const float> mean, std::span<const float> var,
                                 std::span<const float> gamma, std::span<const float> beta,
                                 float eps) {
  require_rank(weight, 4, "conv weight");
  const std::size_t cout = weight.dim(0);
  detail::check_bn_lengths(cout, bias, mean, var, gamma, beta);
  FoldedConv f{weight, Tensor({cout}, 0.0f)};
  const std::size_t per_out = weight.size() / cout;
  for (std::size_t c = 0; c < cout; ++c) {
    const float scale = gamma[c] / std::sqrt(var[c] + eps);
    for (std::size_t i = 0; i < per_out; ++i) f.weight[c * per_out + i] *= scale;
    const float b = bias.empty() ? 0.0f : bias[c];
    f.bias[c] = (b - mean[c]) * scale + beta[c];
  }
  return f;
}

// Same fold for a transposed-convolution weight (Cin, Cout/groups, Kh, Kw),
// whose output channel for (ci, co_local) is (ci / cin_per_group) * Cout/groups + co_local.
inline FoldedConv fold_batchnorm_transposed(const Tensor& weight, std::int64_t groups,
                                            std::span<const float> bias,
                                            std::span<const float> mean,
                                            std::span<const float> var,
                                            std::span<const float> gamma,
                                            std::span<const float> beta, float eps) {
  require_rank(weight, 4, "deconv weight");
  const std::size_t cin = weight.dim(0), cout_g = weight.dim(1);
  const auto g = std::size_t(groups);
  if (g == 0 || cin % g != 0) throw ConfigError("groups do not divide deconv input channels");
  const std::size_t cout = cout_g * g, cin_g = cin / g;
  detail::check_bn_lengths(cout, bias, mean, var, gamma, beta);
  const std::size_t kk = weight.dim(2) * weight.dim(3);
  std::vector<float> scale(cout);
  FoldedConv f{weight, Tensor({cout}, 0.0f)};
  for (std::size_t c = 0; c < cout; ++c) {
    scale[c] = gamma[c] / std::sqrt(var[c] + eps);
    const float b = bias.empty() ? 0.0f : bias[c];
    f.bias[c] = (b - mean[c]) * scale[c] + beta[c];
  }
  for (std::size_t ci = 0; ci < cin; ++ci) {
    const std::size_t base = (ci / cin_g) * cout_g;
    for (std::size_t co = 0; co < cout_g; ++co) {
      float* w = f.weight.raw() + (ci * cout_g + co) * kk;
      for (std::size_t i = 0; i < kk; ++i) w[i] *= scale[base + co];
    }
  }
  return f;
}

namespace detail {

inline void depthwise_plane(const float* in, std::int64_t H, std::int64_t W,
                            const float* w, std::int64_t Kh, std::int64_t Kw,
                            float bias, const ConvParams& p, float* out,
                            std::int64_t Ho, std::int64_t Wo) {
  const std::int64_t sh = p.stride.h, sw = p.stride.w;
  for (std::int64_t oh = 0; oh < Ho; ++oh) {
    float* orow = out + oh * Wo;
    for (std::int64_t ow = 0; ow < Wo; ++ow) orow[ow] = 0.0f;
    for (std::int64_t kh = 0; kh < Kh; ++kh) {
      const std::int64_t ih = oh * sh - p.padding.h + kh * p.dilation.h;
      if (ih < 0 || ih >= H) continue;
      const float* irow = in + ih * W;
      for (std::int64_t kw = 0; kw < Kw; ++kw) {
        const std::int64_t off = kw * p.dilation.w - p.padding.w;
        // valid ow: 0 <= ow*sw + off < W
        std::int64_t lo = off >= 0 ? 0 : (-off + sw - 1) / sw;
        std::int64_t hi = (W - 1 - off) < 0 ? -1 : (W - 1 - off) / sw;
        hi = std::min(hi, Wo - 1);
        const float wv = w[kh * Kw + kw];
        if (sw == 1) {
          const float* src = irow + off;
          for (std::int64_t ow = lo; ow <= hi; ++ow) orow[ow] += wv * src[ow];
        } else {
          for (std::int64_t ow = lo; ow <= hi; ++ow) orow[ow] += wv * irow[ow * sw + off];
        }
      }
    }
    for (std::int64_t ow = 0; ow < Wo; ++ow) orow[ow] += bias;
  }
}

// Unrolls one group of one image into a (cin_g*Kh*Kw) x (Ho*Wo) matrix.
inline void im2col(const float* in, std::int64_t cin_g, std::int64_t H, std::int64_t W,
                   std::int64_t Kh, std::int64_t Kw, const ConvParams& p,
                   std::int64_t Ho, std::int64_t Wo, float* col) {
  for (std::int64_t ci = 0; ci < cin_g; ++ci) {
    const float* plane = in + ci * H * W;
    for (std::int64_t kh = 0; kh < Kh; ++kh) {
      for (std::int64_t kw = 0; kw < Kw; ++kw) {
        float* dst = col + ((ci * Kh + kh) * Kw + kw) * Ho * Wo;
        for (std::int64_t oh = 0; oh < Ho; ++oh) {
          const std::int64_t ih = oh * p.stride.h - p.padding.h + kh * p.dilation.h;
          float* drow = dst + oh * Wo;
          if (ih < 0 || ih >= H) {
            for (std::int64_t ow = 0; ow < Wo; ++ow) drow[ow] = 0.0f;
            continue;
          }
          const float* irow = plane + ih * W;
          for (std::int64_t ow = 0; ow < Wo; ++ow) {
            const std::int64_t iw = ow * p.stride.w - p.padding.w + kw * p.dilation.w;
            drow[ow] = (iw >= 0 && iw < W) ? irow[iw] : 0.0f;
          }
        }
      }
    }
  }
}

}  // namespace detail

// Optimized convolution. Depthwise layers run a direct per-channel kernel,
// 1x1 stride-1 layers feed the input straight into the matrix product, and
// everything else goes through im2col + blocked GEMM. Work is split across
// output channels.
inline Tensor conv2d(const Tensor& input, const FoldedConv& folded, const ConvParams& p,
                     Activation act = Activation::identity) {
  const Shape out_shape = conv_output_shape(input.shape(), folded.weight.shape(), p);
  check_bias(&folded.bias, out_shape[1]);
  Tensor out(out_shape);

  const auto N = std::int64_t(input.dim(0)), Cin = std::int64_t(input.dim(1));
  const auto H = std::int64_t(input.dim(2)), W = std::int64_t(input.dim(3));
  const auto Cout = std::int64_t(out_shape[1]);
  const auto Kh = std::int64_t(folded.weight.dim(2)), Kw = std::int64_t(folded.weight.dim(3));
  const auto Ho = std::int64_t(out_shape[2]), Wo = std::int64_t(out_shape[3]);
  const std::int64_t G = p.groups, cin_g = Cin / G, cout_g = Cout / G;
  const std::int64_t hw_out = Ho * Wo, kdim = cin_g * Kh * Kw;
  const float* wdata = folded.weight.raw();
  const float* bdata = folded.bias.raw();

  const bool depthwise = cin_g == 1 && cout_g == 1;
  const bool pointwise = Kh == 1 && Kw == 1 && p.stride == Pair{1, 1} &&
                         p.padding == Pair{0, 0};

  for (std::int64_t n = 0; n < N; ++n) {
    const float* in_n = input.raw() + n * Cin * H * W;
    float* out_n = out.raw() + n * Cout * hw_out;
    if (depthwise) {
      parallel_for(std::size_t(Cout), [&](std::size_t b, std::size_t e) {
        for (auto c = std::int64_t(b); c < std::int64_t(e); ++c) {
          detail::depthwise_plane(in_n + c * H * W, H, W, wdata + c * Kh * Kw, Kh, Kw,
                                  bdata[c], p, out_n + c * hw_out, Ho, Wo);
        }
      });
    } else {
      std::vector<float> col;
      for (std::int64_t g = 0; g < G; ++g) {
        const float* in_g = in_n + g * cin_g * H * W;
        const float* B = in_g;
        if (!pointwise) {
          col.resize(std::size_t(kdim * hw_out));
          detail::im2col(in_g, cin_g, H, W, Kh, Kw, p, Ho, Wo, col.data());
          B = col.data();
        }
        float* out_g = out_n + g * cout_g * hw_out;
        parallel_for(std::size_t(cout_g), [&](std::size_t b, std::size_t e) {
          sgemm_acc(e - b, std::size_t(hw_out), std::size_t(kdim),
                    wdata + (g * cout_g + std::int64_t(b)) * kdim, std::size_t(kdim),
                    B, std::size_t(hw_out),
                    out_g + std::int64_t(b) * hw_out, std::size_t(hw_out));
          for (std::size_t c = b; c < e; ++c) {
            const float bv = bdata[g * cout_g + std::int64_t(c)];
            float* row = out_g + std::int64_t(c) * hw_out;
            for (std::int64_t i = 0; i < hw_out; ++i) row[i] += bv;
          }
        });
      }
    }
  }
  activate_inplace(out.data(), act);
  return out;
}

// Optimized transposed convolution: per group, cols = W^T * X as one matrix
// product, then each (co, kh, kw) row is scattered into the output (col2im).
inline Tensor deconv2d(const Tensor& input, const FoldedConv& folded, const DeconvParams& p,
                       Activation act = Activation::identity) {
  const Shape out_shape = deconv_output_shape(input.shape(), folded.weight.shape(), p);
  check_bias(&folded.bias, out_shape[1]);
  Tensor out(out_shape);

  const auto N = std::int64_t(input.dim(0)), Cin = std::int64_t(input.dim(1));
  const auto H = std::int64_t(input.dim(2)), W = std::int64_t(input.dim(3));
  const auto Kh = std::int64_t(folded.weight.dim(2)), Kw = std::int64_t(folded.weight.dim(3));
  const auto Ho = std::int64_t(out_shape[2]), Wo = std::int64_t(out_shape[3]);
  const std::int64_t G = p.groups, cin_g = Cin / G;
  const auto cout_g = std::int64_t(folded.weight.dim(1));
  const std::int64_t Cout = cout_g * G, KK = Kh * Kw, hw_in = H * W;

  // wt[g][(co, kh, kw)][ci] = weight[g*cin_g + ci][co][kh][kw]
  std::vector<float> wt(std::size_t(G * cout_g * KK * cin_g));
  for (std::int64_t g = 0; g < G; ++g)
    for (std::int64_t ci = 0; ci < cin_g; ++ci)
      for (std::int64_t co = 0; co < cout_g; ++co)
        for (std::int64_t k = 0; k < KK; ++k)
          wt[std::size_t(((g * cout_g + co) * KK + k) * cin_g + ci)] =
              folded.weight[std::size_t(((g * cin_g + ci) * cout_g + co) * KK + k)];

  for (std::int64_t n = 0; n < N; ++n) {
    const float* in_n = input.raw() + n * Cin * hw_in;
    float* out_n = out.raw() + n * Cout * Ho * Wo;
    for (std::int64_t g = 0; g < G; ++g) {
      parallel_for(std::size_t(cout_g), [&](std::size_t b, std::size_t e) {
        const auto rows = std::size_t((std::int64_t(e) - std::int64_t(b)) * KK);
        std::vector<float> cols(rows * std::size_t(hw_in), 0.0f);
        sgemm_acc(rows, std::size_t(hw_in), std::size_t(cin_g),
                  wt.data() + (g * cout_g + std::int64_t(b)) * KK * cin_g, std::size_t(cin_g),
                  in_n + g * cin_g * hw_in, std::size_t(hw_in), cols.data(),
                  std::size_t(hw_in));
        for (auto co = std::int64_t(b); co < std::int64_t(e); ++co) {
          const std::int64_t oc = g * cout_g + co;
          float* plane = out_n + oc * Ho * Wo;
          const float bv = folded.bias[std::size_t(oc)];
          for (std::int64_t i = 0; i < Ho * Wo; ++i) plane[i] = bv;
          for (std::int64_t kh = 0; kh < Kh; ++kh) {
            for (std::int64_t kw = 0; kw < Kw; ++kw) {
              const float* src =
                  cols.data() + ((co - std::int64_t(b)) * KK + kh * Kw + kw) * hw_in;
              for (std::int64_t ih = 0; ih < H; ++ih) {
                const std::int64_t oh = ih * p.stride.h - p.padding.h + kh;
                if (oh < 0 || oh >= Ho) continue;
                float* orow = plane + oh * Wo;
                const float* srow = src + ih * W;
                for (std::int64_t iw = 0; iw < W; ++iw) {
                  const std::int64_t ow = iw * p.stride.w - p.padding.w + kw;
                  if (ow >= 0 && ow < Wo) orow[ow] += srow[iw];
                }
              }
            }
          }
        }
      });
    }
  }
  activate_inplace(out.data(), act);
  return out;
}

}  // namespace posekit::ops
