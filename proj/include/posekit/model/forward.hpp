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

#include <cstddef>
#include <string>
#include <vector>

#include "posekit/core/error.hpp"
#include "posekit/core/parallel.hpp"
#include "posekit/core/tensor.hpp"
#include "posekit/model/graph.hpp"
#include "posekit/ops/activation.hpp"
#include "posekit/ops/conv.hpp"
#include "posekit/ops/gemm.hpp"
#include "posekit/ops/upsample.hpp"

namespace posekit::model {

// Raw head output. SimCC graphs fill simcc_x (N, K, W*k) and simcc_y
// (N, K, H*k); heatmap graphs fill heatmaps (N, K, h, w).
struct HeadOutput {
  HeadKind kind = HeadKind::simcc;
  Tensor simcc_x;
  Tensor simcc_y;
  Tensor heatmaps;
  std::size_t split_factor = 1;
  std::size_t stride = 1;
};

// Runs layer i of a bound graph on already-computed operands.
inline Tensor run_layer(const Graph& g, std::size_t i, const std::vector<const Tensor*>& ins) {
  const LayerSpec& L = g.layers()[i];
  switch (L.kind) {
    case LayerKind::conv:
      return ops::conv2d(*ins[0], g.bound(i).folded, L.conv_params(), L.act);
    case LayerKind::deconv:
      return ops::deconv2d(*ins[0], g.bound(i).folded, L.deconv_params(), L.act);
    case LayerKind::upsample:
      return ops::bilinear_upsample(*ins[0], L.scale);
    case LayerKind::activation:
      return ops::apply_activation(*ins[0], L.act);
    case LayerKind::add: {
      Tensor out = *ins[0];
      for (std::size_t j = 1; j < ins.size(); ++j) {
        const float* src = ins[j]->raw();
        float* dst = out.raw();
        for (std::size_t e = 0; e < out.size(); ++e) dst[e] += src[e];
      }
      return out;
    }
    case LayerKind::concat: {
      const Shape& s0 = ins[0]->shape();
      std::size_t channels = 0;
      for (auto* t : ins) channels += t->dim(1);
      Tensor out({s0[0], channels, s0[2], s0[3]});
      const std::size_t plane = s0[2] * s0[3];
      for (std::size_t n = 0; n < s0[0]; ++n) {
        float* dst = out.raw() + n * channels * plane;
        for (auto* t : ins) {
          const std::size_t block = t->dim(1) * plane;
          std::copy_n(t->raw() + n * block, block, dst);
          dst += block;
        }
      }
      return out;
    }
    case LayerKind::heatmap_head: {
      ConvParams p;
      return ops::conv2d(*ins[0], g.bound(i).folded, p);
    }
    case LayerKind::simcc_head: {
      // Shared linear layer applied to every flattened keypoint map:
      // out[n, j, :] = W * feat[n, j, :] + b.
      const Tensor& x = *ins[0];
      const BoundLayer& b = g.bound(i);
      const std::size_t N = x.dim(0), K = x.dim(1), hw = x.dim(2) * x.dim(3);
      const std::size_t L_out = L.simcc_x + L.simcc_y;
      Tensor out({N, K, L_out});
      for (std::size_t n = 0; n < N; ++n) {
        float* dst = out.raw() + n * K * L_out;
        for (std::size_t j = 0; j < K; ++j) {
          std::copy_n(b.folded.bias.raw(), L_out, dst + j * L_out);
        }
        const float* feat = x.raw() + n * K * hw;
        parallel_for(K, [&](std::size_t lo, std::size_t hi) {
          ops::sgemm_acc(hi - lo, L_out, hw, feat + lo * hw, hw, b.transposed.data(), L_out,
                         dst + lo * L_out, L_out);
        });
      }
      return out;
    }
  }
  throw ConfigError("unhandled layer kind in forward");
}

// Executes the graph in layer order. Intermediate tensors are released after
// their last consumer runs. The graph is not modified, so concurrent calls on
// one bound graph are safe.
inline HeadOutput forward(const Graph& g, const Tensor& input) {
  if (auto missing = g.unbound_layers(); !missing.empty()) {
    std::string list;
    for (const auto& id : missing) list += (list.empty() ? "" : ", ") + id;
    throw InitializationError("graph '" + g.name() + "' has unbound layers: " + list);
  }
  if (input.shape() != g.input_shape()) {
    throw DimensionError("forward input shape " + shape_str(input.shape()) +
                         " differs from declared " + shape_str(g.input_shape()));
  }
  const auto& layers = g.layers();
  const std::size_t n = layers.size();
  std::vector<std::vector<std::size_t>> operands(n);
  std::vector<std::size_t> last_use(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    for (const auto& src : layers[i].inputs) {
      if (src == kGraphInput) {
        operands[i].push_back(n);
      } else {
        const std::size_t j = g.index_of(src);
        operands[i].push_back(j);
        last_use[j] = i;
      }
    }
  }
  std::vector<Tensor> values(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<const Tensor*> ins;
    for (auto j : operands[i]) ins.push_back(j == n ? &input : &values[j]);
    values[i] = run_layer(g, i, ins);
    for (auto j : operands[i]) {
      if (j != n && last_use[j] == i) values[j] = Tensor();
    }
  }

  HeadOutput out;
  out.kind = g.head();
  Tensor& last = values.back();
  if (g.head() == HeadKind::heatmap) {
    out.stride = g.heatmap_stride();
    out.heatmaps = std::move(last);
    return out;
  }
  const auto& head = layers.back();
  const std::size_t N = last.dim(0), K = last.dim(1), Lx = head.simcc_x, Ly = head.simcc_y;
  out.split_factor = g.split_factor();
  out.simcc_x = Tensor({N, K, Lx});
  out.simcc_y = Tensor({N, K, Ly});
  for (std::size_t r = 0; r < N * K; ++r) {
    const float* src = last.raw() + r * (Lx + Ly);
    std::copy_n(src, Lx, out.simcc_x.raw() + r * Lx);
    std::copy_n(src + Lx, Ly, out.simcc_y.raw() + r * Ly);
  }
  return out;
}

}  // namespace posekit::model
