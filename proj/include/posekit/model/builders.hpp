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

// Default MovePose and Lite architectures.
//
// Recipe (version 1), for input S x S with S divisible by 32:
//   stem      3x3 s2 conv, BN, ReLU                                  S/2
//   encoder   MobileNet-style depthwise-separable blocks
//             (3x3 depthwise + 1x1 pointwise, BN, ReLU each)
//             stage widths e0..e4 at strides 2, 4, 8, 16, 32; the last
//             block of the stride-4/8/16 stages feeds a skip connection
//   bottleneck two large-kernel depthwise-separable blocks at S/32
//   decoder   three stages, each: 4x4 s2 transposed conv (or bilinear x2 +
//             1x1 conv), plus a 1x1 lateral conv of the matching encoder
//             skip, summed, then one large-kernel depthwise-separable
//             refinement block                                       S/4
//   head      MovePose: 1x1 conv to K channels, then a SimCC head that maps
//             each flattened (S/4)^2 keypoint map to x and y vectors of
//             length S*k.
//             Lite: 1x1 conv emitting K heatmaps at S/4.
//
// The large-kernel sites (2 bottleneck + 3 refinement blocks) take their
// kernel sizes from ModelConfig::large_kernels; the default is 7 everywhere.

#include <array>
#include <cmath>
#include <cstddef>
#include <random>
#include <string>
#include <vector>

#include "posekit/core/error.hpp"
#include "posekit/model/graph.hpp"

namespace posekit::model {

enum class UpsampleMode { deconv, bilinear };

inline constexpr int kRecipeVersion = 1;

struct ModelConfig {
  std::size_t keypoints = 17;
  std::size_t input_size = 256;
  std::size_t split_factor = 2;
  std::array<std::size_t, 5> encoder_widths{24, 40, 80, 128, 192};
  std::array<std::size_t, 3> decoder_widths{128, 80, 48};
  std::array<std::size_t, 5> large_kernels{7, 7, 7, 7, 7};
  UpsampleMode upsample = UpsampleMode::deconv;
  ops::Activation act = ops::Activation::relu;

  void set_uniform_kernel(std::size_t k) { large_kernels.fill(k); }

  // Alternating 5x5 / 7x7 large kernels.
  void set_mixed_5_7() { large_kernels = {5, 7, 5, 7, 5}; }

  void validate() const {
    if (keypoints == 0) throw ConfigError("keypoint count must be >= 1");
    if (split_factor == 0) throw ConfigError("splitting factor k must be >= 1");
    if (input_size == 0 || input_size % 32 != 0) {
      throw ConfigError("input size must be a positive multiple of 32, got " +
                        std::to_string(input_size));
    }
    for (auto k : large_kernels) {
      if (k != 1 && k != 3 && k != 5 && k != 7) {
        throw ConfigError("large-kernel size must be one of 1, 3, 5, 7; got " + std::to_string(k));
      }
    }
    for (auto w : encoder_widths)
      if (w == 0) throw ConfigError("encoder widths must be positive");
    for (auto w : decoder_widths)
      if (w == 0) throw ConfigError("decoder widths must be positive");
  }
};

namespace detail {

class Builder {
 public:
  Builder(Graph& g, ops::Activation act) : g_(g), act_(act) {}

  std::string conv(const std::string& id, const std::string& in, std::size_t cin,
                   std::size_t cout, std::size_t k, std::int64_t stride, std::int64_t groups,
                   bool bn, ops::Activation act) {
    LayerSpec L;
    L.id = id;
    L.kind = LayerKind::conv;
    L.inputs = {in};
    L.in_channels = cin;
    L.out_channels = cout;
    L.kernel = k;
    L.stride = stride;
    L.padding = std::int64_t(k / 2);
    L.groups = groups;
    L.batch_norm = bn;
    L.bias = !bn;
    L.act = act;
    g_.add_layer(std::move(L));
    return id;
  }

  // Depthwise k x k (stride s) followed by pointwise 1x1, BN + activation each.
  std::string dw_block(const std::string& id, const std::string& in, std::size_t cin,
                       std::size_t cout, std::size_t k, std::int64_t stride) {
    const auto dw = conv(id + "_dw", in, cin, cin, k, stride, std::int64_t(cin), true, act_);
    return conv(id + "_pw", dw, cin, cout, 1, 1, 1, true, act_);
  }

  std::string upsample(const std::string& id, const std::string& in, std::size_t cin,
                       std::size_t cout, UpsampleMode mode) {
    if (mode == UpsampleMode::deconv) {
      LayerSpec L;
      L.id = id;
      L.kind = LayerKind::deconv;
      L.inputs = {in};
      L.in_channels = cin;
      L.out_channels = cout;
      L.kernel = 4;
      L.stride = 2;
      L.padding = 1;
      L.batch_norm = true;
      L.bias = false;
      L.act = act_;
      g_.add_layer(std::move(L));
      return id;
    }
    LayerSpec U;
    U.id = id + "_interp";
    U.kind = LayerKind::upsample;
    U.inputs = {in};
    U.scale = 2;
    g_.add_layer(std::move(U));
    return conv(id, id + "_interp", cin, cout, 1, 1, 1, true, act_);
  }

  std::string add(const std::string& id, std::vector<std::string> ins) {
    LayerSpec L;
    L.id = id;
    L.kind = LayerKind::add;
    L.inputs = std::move(ins);
    g_.add_layer(std::move(L));
    return id;
  }

 private:
  Graph& g_;
  ops::Activation act_;
};

// Shared encoder/decoder trunk. Returns the id of the stride-4 feature map.
inline std::string build_trunk(Graph& g, const ModelConfig& c) {
  Builder b(g, c.act);
  const auto [e0, e1, e2, e3, e4] = c.encoder_widths;
  const auto [d0, d1, d2] = c.decoder_widths;
  const auto& lk = c.large_kernels;

  auto x = b.conv("stem", std::string(kGraphInput), 3, e0, 3, 2, 1, true, c.act);
  x = b.dw_block("enc1", x, e0, e0, 3, 1);
  x = b.dw_block("enc2", x, e0, e1, 3, 2);
  const auto skip4 = x = b.dw_block("enc3", x, e1, e1, 3, 1);
  x = b.dw_block("enc4", x, e1, e2, 3, 2);
  x = b.dw_block("enc5", x, e2, e2, 3, 1);
  const auto skip8 = x = b.dw_block("enc6", x, e2, e2, 3, 1);
  x = b.dw_block("enc7", x, e2, e3, 3, 2);
  x = b.dw_block("enc8", x, e3, e3, 3, 1);
  const auto skip16 = x = b.dw_block("enc9", x, e3, e3, 3, 1);
  x = b.dw_block("enc10", x, e3, e4, 3, 2);
  x = b.dw_block("neck1", x, e4, e4, lk[0], 1);
  x = b.dw_block("neck2", x, e4, e4, lk[1], 1);

  const std::array<std::string, 3> skips{skip16, skip8, skip4};
  const std::array<std::size_t, 3> skip_ch{e3, e2, e1};
  const std::array<std::size_t, 3> dec{d0, d1, d2};
  std::size_t ch = e4;
  for (std::size_t s = 0; s < 3; ++s) {
    const std::string n = std::to_string(s + 1);
    const auto up = b.upsample("up" + n, x, ch, dec[s], c.upsample);
    const auto lat = b.conv("lat" + n, skips[s], skip_ch[s], dec[s], 1, 1, 1, true,
                            ops::Activation::identity);
    x = b.add("merge" + n, {up, lat});
    x = b.dw_block("refine" + n, x, dec[s], dec[s], lk[2 + s], 1);
    ch = dec[s];
  }
  return x;
}

}  // namespace detail

inline Graph build_movepose(const ModelConfig& c = {}) {
  c.validate();
  Graph g("movepose", HeadKind::simcc, {1, 3, c.input_size, c.input_size});
  const auto feat = detail::build_trunk(g, c);
  detail::Builder b(g, c.act);
  b.conv("keypoint_conv", feat, c.decoder_widths[2], c.keypoints, 1, 1, 1, false,
         ops::Activation::identity);
  LayerSpec head;
  head.id = "simcc";
  head.kind = LayerKind::simcc_head;
  head.inputs = {"keypoint_conv"};
  head.in_channels = c.keypoints;
  head.simcc_x = c.input_size * c.split_factor;
  head.simcc_y = c.input_size * c.split_factor;
  g.add_layer(std::move(head));
  g.validate();
  return g;
}

inline Graph build_lite(const ModelConfig& c = {}) {
  c.validate();
  Graph g("lite", HeadKind::heatmap, {1, 3, c.input_size, c.input_size});
  const auto feat = detail::build_trunk(g, c);
  LayerSpec head;
  head.id = "heatmap";
  head.kind = LayerKind::heatmap_head;
  head.inputs = {feat};
  head.in_channels = c.decoder_widths[2];
  head.out_channels = c.keypoints;
  g.add_layer(std::move(head));
  g.validate();
  return g;
}

// Raw (unfolded) parameters for every layer: uniform weights scaled by fan-in,
// unit-ish batch-norm statistics, small biases. Deterministic in the seed.
inline std::map<std::string, Tensor> random_parameters(const Graph& g, std::uint32_t seed) {
  std::mt19937 rng(seed);
  std::map<std::string, Tensor> out;
  std::uniform_real_distribution<float> small(-0.1f, 0.1f), around_one(0.5f, 1.5f);
  for (const auto& spec : g.parameter_specs()) {
    Tensor t(spec.shape);
    const std::string suffix = spec.name.substr(spec.name.rfind('.') + 1);
    if (suffix == "weight") {
      const std::size_t fan_in = spec.shape.size() == 4
                                     ? spec.shape[1] * spec.shape[2] * spec.shape[3]
                                     : spec.shape[1];
      const float a = std::sqrt(6.0f / float(fan_in));
      std::uniform_real_distribution<float> d(-a, a);
      for (auto& v : t.storage()) v = d(rng);
    } else if (suffix == "bn_gamma" || suffix == "bn_var") {
      for (auto& v : t.storage()) v = around_one(rng);
    } else {
      for (auto& v : t.storage()) v = small(rng);
    }
    out.emplace(spec.name, std::move(t));
  }
  return out;
}

inline void init_random(Graph& g, std::uint32_t seed) { g.bind(random_parameters(g, seed)); }

}  // namespace posekit::model
