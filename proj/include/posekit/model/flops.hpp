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
#include <cmath>
#include <cstdio>
#include <map>
#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "posekit/core/tensor.hpp"
#include "posekit/model/graph.hpp"

namespace posekit::model {

struct LayerFlops {
  std::string id;
  std::string kind;
  Shape output_shape;
  std::uint64_t macs = 0;
  std::uint64_t flops = 0;
  std::uint64_t params = 0;
  double receptive_field = 1.0;  // in input pixels
  double jump = 1.0;             // input pixels between adjacent outputs
};

struct FlopReport {
  std::string graph;
  Shape input_shape;
  std::vector<LayerFlops> layers;
  std::uint64_t total_macs = 0;
  std::uint64_t total_flops = 0;
  std::uint64_t params = 0;
  double envelope_lo = 0.5e9;
  double envelope_hi = 1.0e9;
  bool within_envelope = false;
  std::vector<std::string> warnings;

  double gflops() const { return double(total_flops) * 1e-9; }
  double max_receptive_field() const {
    double rf = 0.0;
    for (const auto& l : layers) rf = std::max(rf, l.receptive_field);
    return rf;
  }
  std::string verdict() const { return within_envelope ? "within envelope" : "outside envelope"; }
};

// Per-layer compute and receptive field.
//   conv     MACs = Kh*Kw*(Cin/groups)*Cout*Hout*Wout
//   deconv   MACs = Kh*Kw*(Cout/groups)*Cin*Hin*Win
//   simcc    MACs = K*(h*w)*(Lx+Ly)
//   add, activation: Cout*Hout*Wout FLOPs (no MACs)
//   upsample (bilinear): 4 MACs per output element
//   concat: 0
// FLOPs = 2*MACs for MAC-based layers; all counts scale with batch N.
// Receptive field: rf += (K_eff - 1)*jump, jump *= stride for convolutions;
// transposed convolution and upsampling divide jump by the stride after
// widening rf by the taps each output reads; merges take the widest operand.
inline FlopReport count_flops(const Graph& g, double envelope_lo = 0.5e9,
                              double envelope_hi = 1.0e9) {
  FlopReport r;
  r.graph = g.name();
  r.input_shape = g.input_shape();
  r.envelope_lo = envelope_lo;
  r.envelope_hi = envelope_hi;
  const auto& shapes = g.shapes();
  const auto& layers = g.layers();

  std::vector<double> rf(layers.size()), jump(layers.size());
  auto src_rf = [&](const std::string& id) {
    return id == kGraphInput ? std::pair{1.0, 1.0}
                             : std::pair{rf[g.index_of(id)], jump[g.index_of(id)]};
  };
  std::map<std::string, std::uint64_t> param_count;
  for (const auto& p : g.parameter_specs()) {
    const std::string suffix = p.name.substr(p.name.rfind('.') + 1);
    if (suffix == "bn_mean" || suffix == "bn_var") continue;  // running statistics
    param_count[p.name.substr(0, p.name.rfind('.'))] += shape_numel(p.shape);
  }

  for (std::size_t i = 0; i < layers.size(); ++i) {
    const auto& L = layers[i];
    const Shape& out = shapes[i];
    const Shape in = g.input_shape_of(i, 0);
    LayerFlops e;
    e.id = L.id;
    e.kind = std::string(to_string(L.kind));
    e.output_shape = out;
    e.params = param_count.count(L.id) ? param_count[L.id] : 0;
    auto [rf_in, jump_in] = src_rf(L.inputs[0]);
    for (const auto& s : L.inputs) {
      auto [r2, j2] = src_rf(s);
      if (r2 > rf_in) {
        rf_in = r2;
        jump_in = j2;
      }
    }
    const std::uint64_t numel = shape_numel(out);
    switch (L.kind) {
      case LayerKind::conv: {
        const std::uint64_t k = L.kernel;
        e.macs = k * k * (L.in_channels / std::uint64_t(L.groups)) * numel;
        const double keff = double(L.dilation) * double(k - 1) + 1.0;
        e.receptive_field = rf_in + (keff - 1.0) * jump_in;
        e.jump = jump_in * double(L.stride);
        break;
      }
      case LayerKind::deconv: {
        const std::uint64_t k = L.kernel;
        e.macs = k * k * (L.out_channels / std::uint64_t(L.groups)) * shape_numel(in);
        const double taps = std::ceil(double(k) / double(L.stride));
        e.receptive_field = rf_in + (taps - 1.0) * jump_in;
        e.jump = jump_in / double(L.stride);
        break;
      }
      case LayerKind::upsample:
        e.macs = 4 * numel;
        e.receptive_field = rf_in + jump_in;
        e.jump = jump_in / double(L.scale);
        break;
      case LayerKind::heatmap_head:
        e.macs = L.in_channels * numel;
        e.receptive_field = rf_in;
        e.jump = jump_in;
        break;
      case LayerKind::simcc_head:
        e.macs = in[0] * in[1] * in[2] * in[3] * (L.simcc_x + L.simcc_y);
        e.receptive_field = rf_in + double(std::max(in[2], in[3]) - 1) * jump_in;
        e.jump = jump_in;
        break;
      case LayerKind::add:
      case LayerKind::activation:
        e.flops = numel;
        e.receptive_field = rf_in;
        e.jump = jump_in;
        break;
      case LayerKind::concat:
        e.receptive_field = rf_in;
        e.jump = jump_in;
        break;
    }
    if (e.macs) e.flops = 2 * e.macs;
    rf[i] = e.receptive_field;
    jump[i] = e.jump;
    r.total_macs += e.macs;
    r.total_flops += e.flops;
    r.params += e.params;
    r.layers.push_back(std::move(e));
  }
  const double total = double(r.total_flops);
  r.within_envelope = total >= envelope_lo && total <= envelope_hi;
  if (!r.within_envelope) {
    r.warnings.push_back("total " + std::to_string(r.gflops()) + " GFLOPs is outside the [" +
                         std::to_string(envelope_lo * 1e-9) + ", " +
                         std::to_string(envelope_hi * 1e-9) + "] GFLOPs budget envelope");
  }
  return r;
}

inline nlohmann::json to_json(const FlopReport& r) {
  nlohmann::json j;
  j["graph"] = r.graph;
  j["input_shape"] = r.input_shape;
  j["total_macs"] = r.total_macs;
  j["total_flops"] = r.total_flops;
  j["gflops"] = r.gflops();
  j["params"] = r.params;
  j["max_receptive_field"] = r.max_receptive_field();
  j["envelope_gflops"] = {r.envelope_lo * 1e-9, r.envelope_hi * 1e-9};
  j["verdict"] = r.verdict();
  j["warnings"] = r.warnings;
  auto& layers = j["layers"] = nlohmann::json::array();
  for (const auto& l : r.layers) {
    layers.push_back({{"id", l.id},
                      {"kind", l.kind},
                      {"output_shape", l.output_shape},
                      {"macs", l.macs},
                      {"flops", l.flops},
                      {"params", l.params},
                      {"receptive_field", l.receptive_field},
                      {"jump", l.jump}});
  }
  return j;
}

inline std::string to_csv(const FlopReport& r) {
  std::string s = "id,kind,output_shape,macs,flops,params,receptive_field\n";
  for (const auto& l : r.layers) {
    std::string shape;
    for (std::size_t i = 0; i < l.output_shape.size(); ++i) {
      shape += (i ? "x" : "") + std::to_string(l.output_shape[i]);
    }
    char rf[32];
    std::snprintf(rf, sizeof rf, "%g", l.receptive_field);
    s += l.id + "," + l.kind + "," + shape + "," + std::to_string(l.macs) + "," +
         std::to_string(l.flops) + "," + std::to_string(l.params) + "," + rf + "\n";
  }
  s += "total,,," + std::to_string(r.total_macs) + "," + std::to_string(r.total_flops) + "," +
       std::to_string(r.params) + ",\n";
  return s;
}

}  // namespace posekit::model
