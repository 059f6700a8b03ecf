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
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "posekit/core/conv_params.hpp"
#include "posekit/core/error.hpp"
#include "posekit/core/tensor.hpp"
#include "posekit/ops/activation.hpp"
#include "posekit/ops/conv.hpp"

namespace posekit::model {

enum class LayerKind { conv, deconv, upsample, activation, add, concat, simcc_head, heatmap_head };

inline std::string_view to_string(LayerKind k) {
  switch (k) {
    case LayerKind::conv: return "conv";
    case LayerKind::deconv: return "deconv";
    case LayerKind::upsample: return "upsample";
    case LayerKind::activation: return "activation";
    case LayerKind::add: return "add";
    case LayerKind::concat: return "concat";
    case LayerKind::simcc_head: return "simcc_head";
    case LayerKind::heatmap_head: return "heatmap_head";
  }
  return "?";
}

inline LayerKind parse_layer_kind(std::string_view s) {
  for (auto k : {LayerKind::conv, LayerKind::deconv, LayerKind::upsample, LayerKind::activation,
                 LayerKind::add, LayerKind::concat, LayerKind::simcc_head,
                 LayerKind::heatmap_head}) {
    if (to_string(k) == s) return k;
  }
  throw ConfigError("unknown layer kind '" + std::string(s) + "'");
}

enum class HeadKind { simcc, heatmap };

inline constexpr std::string_view kGraphInput = "input";
inline constexpr float kBatchNormEps = 1e-5f;

// One node of the network description. Which fields matter depends on kind:
//   conv / deconv   in/out channels, kernel, stride, padding, groups, flags
//   upsample        scale (bilinear, align_corners = false)
//   activation      act
//   simcc_head      in_channels = keypoints, simcc_x / simcc_y vector lengths
//   heatmap_head    in_channels -> out_channels (= keypoints), 1x1
struct LayerSpec {
  std::string id;
  LayerKind kind = LayerKind::conv;
  std::vector<std::string> inputs;

  std::size_t in_channels = 0;
  std::size_t out_channels = 0;
  std::size_t kernel = 1;
  std::int64_t stride = 1;
  std::int64_t padding = 0;
  std::int64_t output_padding = 0;
  std::int64_t dilation = 1;
  std::int64_t groups = 1;
  bool bias = true;
  bool batch_norm = false;
  ops::Activation act = ops::Activation::identity;

  std::int64_t scale = 2;
  std::size_t simcc_x = 0;
  std::size_t simcc_y = 0;

  bool has_params() const {
    return kind == LayerKind::conv || kind == LayerKind::deconv ||
           kind == LayerKind::simcc_head || kind == LayerKind::heatmap_head;
  }

  ConvParams conv_params() const {
    ConvParams p;
    p.stride = {stride, stride};
    p.padding = {padding, padding};
    p.dilation = {dilation, dilation};
    p.groups = groups;
    return p;
  }

  DeconvParams deconv_params() const {
    DeconvParams p;
    p.stride = {stride, stride};
    p.padding = {padding, padding};
    p.output_padding = {output_padding, output_padding};
    p.groups = groups;
    return p;
  }
};

struct ParamSpec {
  std::string name;
  Shape shape;
};

// Weights for one parametric layer after batch-norm folding. For the SimCC
// head, `transposed` caches the (h*w, Lx+Ly) transpose of the linear weight.
struct BoundLayer {
  ops::FoldedConv folded;
  std::vector<float> transposed;
};

class Graph {
 public:
  Graph() = default;
  Graph(std::string name, HeadKind head, Shape input_shape)
      : name_(std::move(name)), head_(head), input_shape_(std::move(input_shape)) {}

  const std::string& name() const noexcept { return name_; }
  HeadKind head() const noexcept { return head_; }
  const Shape& input_shape() const noexcept { return input_shape_; }
  const std::vector<LayerSpec>& layers() const noexcept { return layers_; }

  void add_layer(LayerSpec spec) {
    layers_.push_back(std::move(spec));
    bound_.emplace_back();
    shapes_.clear();
  }

  // Mutable access for graph surgery in tests; invalidates cached shapes and
  // any bound weights.
  std::vector<LayerSpec>& mutable_layers() {
    shapes_.clear();
    raw_.clear();
    bound_.assign(layers_.size(), std::nullopt);
    return layers_;
  }

  std::size_t index_of(std::string_view id) const {
    for (std::size_t i = 0; i < layers_.size(); ++i) {
      if (layers_[i].id == id) return i;
    }
    throw ConfigError("unknown layer id '" + std::string(id) + "'");
  }

  // Checks the DAG invariants (unique ids, inputs reference earlier layers or
  // the graph input, last layer is the declared head) and runs shape
  // inference, which rejects incompatible add/concat operands.
  void validate() const { (void)shapes(); }

  // Output shape of every layer, in layer order.
  const std::vector<Shape>& shapes() const {
    if (shapes_.empty() && !layers_.empty()) shapes_ = infer_shapes();
    if (layers_.empty()) throw ConfigError("graph '" + name_ + "' has no layers");
    return shapes_;
  }

  Shape input_shape_of(std::size_t layer, std::size_t operand) const {
    const auto& src = layers_[layer].inputs.at(operand);
    if (src == kGraphInput) return input_shape_;
    return shapes()[index_of(src)];
  }

  std::vector<ParamSpec> parameter_specs() const {
    std::vector<ParamSpec> out;
    const auto& sh = shapes();
    for (std::size_t i = 0; i < layers_.size(); ++i) {
      for (auto& p : layer_param_specs(i, sh)) out.push_back(std::move(p));
    }
    return out;
  }

  // Binds one layer's raw tensors, keyed by suffix (weight, bias, bn_gamma,
  // bn_beta, bn_mean, bn_var). Batch norm is folded here.
  void set_layer_weights(std::string_view id, std::map<std::string, Tensor> tensors) {
    const std::size_t i = index_of(id);
    const auto& L = layers_[i];
    if (!L.has_params()) throw ConfigError("layer '" + L.id + "' has no parameters");
    const auto specs = layer_param_specs(i, shapes());
    std::set<std::string> wanted;
    for (const auto& spec : specs) {
      const std::string suffix = spec.name.substr(L.id.size() + 1);
      wanted.insert(suffix);
      auto it = tensors.find(suffix);
      if (it == tensors.end()) {
        throw WeightsError("weights-missing-tensor", "missing tensor '" + spec.name + "'");
      }
      if (it->second.shape() != spec.shape) {
        throw WeightsError("weights-shape-mismatch",
                           "tensor '" + spec.name + "' has shape " +
                               shape_str(it->second.shape()) + ", expected " +
                               shape_str(spec.shape));
      }
    }
    BoundLayer b;
    const Tensor* bias = wanted.count("bias") ? &tensors.at("bias") : nullptr;
    std::span<const float> bias_span;
    if (bias) bias_span = bias->data();
    if (L.kind == LayerKind::simcc_head) {
      const Tensor& w = tensors.at("weight");
      b.folded = ops::FoldedConv::without_bn(w, w.dim(0), bias);
      const std::size_t rows = w.dim(0), cols = w.dim(1);
      b.transposed.resize(rows * cols);
      for (std::size_t r = 0; r < rows; ++r)
        for (std::size_t c = 0; c < cols; ++c) b.transposed[c * rows + r] = w[r * cols + c];
    } else if (L.batch_norm) {
      const auto& t = tensors;
      if (L.kind == LayerKind::deconv) {
        b.folded = ops::fold_batchnorm_transposed(
            t.at("weight"), L.groups, bias_span, t.at("bn_mean").data(), t.at("bn_var").data(),
            t.at("bn_gamma").data(), t.at("bn_beta").data(), kBatchNormEps);
      } else {
        b.folded = ops::fold_batchnorm(t.at("weight"), bias_span, t.at("bn_mean").data(),
                                       t.at("bn_var").data(), t.at("bn_gamma").data(),
                                       t.at("bn_beta").data(), kBatchNormEps);
      }
    } else {
      b.folded = ops::FoldedConv::without_bn(tensors.at("weight"), out_channels(i), bias);
    }
    for (auto& [suffix, tensor] : tensors) {
      if (wanted.count(suffix)) raw_[L.id + "." + suffix] = std::move(tensor);
    }
    bound_[i] = std::move(b);
  }

  // All-or-nothing binding from a flat name -> tensor map. Every expected
  // tensor is checked before anything is bound. Returns the names that the
  // graph does not use.
  std::vector<std::string> bind(const std::map<std::string, Tensor>& tensors) {
    const auto specs = parameter_specs();
    std::set<std::string> expected;
    for (const auto& s : specs) {
      expected.insert(s.name);
      auto it = tensors.find(s.name);
      if (it == tensors.end()) {
        throw WeightsError("weights-missing-tensor", "missing tensor '" + s.name + "'");
      }
      if (it->second.shape() != s.shape) {
        throw WeightsError("weights-shape-mismatch",
                           "tensor '" + s.name + "' has shape " + shape_str(it->second.shape()) +
                               ", expected " + shape_str(s.shape));
      }
    }
    Graph staged = *this;
    for (const auto& L : layers_) {
      if (!L.has_params()) continue;
      std::map<std::string, Tensor> per_layer;
      const std::string prefix = L.id + ".";
      for (const auto& [name, t] : tensors) {
        if (name.starts_with(prefix) && expected.count(name)) {
          per_layer.emplace(name.substr(prefix.size()), t);
        }
      }
      staged.set_layer_weights(L.id, std::move(per_layer));
    }
    *this = std::move(staged);
    std::vector<std::string> extras;
    for (const auto& [name, t] : tensors) {
      if (!expected.count(name)) extras.push_back(name);
    }
    return extras;
  }

  std::vector<std::string> unbound_layers() const {
    std::vector<std::string> out;
    for (std::size_t i = 0; i < layers_.size(); ++i) {
      if (layers_[i].has_params() && !bound_[i]) out.push_back(layers_[i].id);
    }
    return out;
  }

  bool is_bound() const { return unbound_layers().empty(); }

  const BoundLayer& bound(std::size_t i) const {
    if (!bound_.at(i)) {
      throw InitializationError("layer '" + layers_[i].id + "' has no weights bound");
    }
    return *bound_[i];
  }

  // Raw (unfolded) tensors by full name, in parameter_specs() order.
  std::vector<std::pair<std::string, const Tensor*>> raw_tensors() const {
    std::vector<std::pair<std::string, const Tensor*>> out;
    for (const auto& s : parameter_specs()) {
      auto it = raw_.find(s.name);
      if (it == raw_.end()) {
        throw InitializationError("tensor '" + s.name + "' is not bound");
      }
      out.emplace_back(s.name, &it->second);
    }
    return out;
  }

  // Head geometry derived from shapes: SimCC splitting factor k, or the
  // heatmap output stride.
  std::size_t split_factor() const {
    const auto& L = layers_.back();
    if (L.kind != LayerKind::simcc_head) throw ConfigError("graph has no SimCC head");
    return L.simcc_x / input_shape_[3];
  }

  std::size_t heatmap_stride() const {
    if (layers_.back().kind != LayerKind::heatmap_head) {
      throw ConfigError("graph has no heatmap head");
    }
    return input_shape_[3] / shapes().back()[3];
  }

  std::size_t keypoints() const { return shapes().back()[1]; }

 private:
  std::size_t out_channels(std::size_t i) const { return shapes()[i][1]; }

  std::vector<ParamSpec> layer_param_specs(std::size_t i, const std::vector<Shape>& sh) const {
    const auto& L = layers_[i];
    std::vector<ParamSpec> out;
    const std::string& id = L.id;
    const std::size_t k = L.kernel;
    auto add_channel_params = [&](std::size_t cout) {
      if (L.bias) out.push_back({id + ".bias", {cout}});
      if (L.batch_norm) {
        for (const char* s : {"bn_gamma", "bn_beta", "bn_mean", "bn_var"}) {
          out.push_back({id + "." + s, {cout}});
        }
      }
    };
    switch (L.kind) {
      case LayerKind::conv:
        out.push_back({id + ".weight",
                       {L.out_channels, L.in_channels / std::size_t(L.groups), k, k}});
        add_channel_params(L.out_channels);
        break;
      case LayerKind::deconv:
        out.push_back({id + ".weight",
                       {L.in_channels, L.out_channels / std::size_t(L.groups), k, k}});
        add_channel_params(L.out_channels);
        break;
      case LayerKind::heatmap_head:
        out.push_back({id + ".weight", {L.out_channels, L.in_channels, 1, 1}});
        out.push_back({id + ".bias", {L.out_channels}});
        break;
      case LayerKind::simcc_head: {
        const Shape& in = input_shape_for(i, 0, sh);
        out.push_back({id + ".weight", {L.simcc_x + L.simcc_y, in[2] * in[3]}});
        out.push_back({id + ".bias", {L.simcc_x + L.simcc_y}});
        break;
      }
      default:
        break;
    }
    return out;
  }

  const Shape& input_shape_for(std::size_t i, std::size_t operand,
                               const std::vector<Shape>& sh) const {
    const auto& src = layers_[i].inputs.at(operand);
    if (src == kGraphInput) return input_shape_;
    return sh[index_of(src)];
  }

  std::vector<Shape> infer_shapes() const {
    if (input_shape_.size() != 4) throw DimensionError("graph input shape must be 4-D");
    std::vector<Shape> sh;
    std::map<std::string, std::size_t> seen;
    for (std::size_t i = 0; i < layers_.size(); ++i) {
      const auto& L = layers_[i];
      if (L.id.empty() || L.id == kGraphInput || L.id.find('.') != std::string::npos) {
        throw ConfigError("invalid layer id '" + L.id + "'");
      }
      if (seen.count(L.id)) throw ConfigError("duplicate layer id '" + L.id + "'");
      if (L.inputs.empty()) throw ConfigError("layer '" + L.id + "' has no inputs");
      std::vector<Shape> ins;
      for (const auto& src : L.inputs) {
        if (src == kGraphInput) {
          ins.push_back(input_shape_);
        } else if (auto it = seen.find(src); it != seen.end()) {
          ins.push_back(sh[it->second]);
        } else {
          throw ConfigError("layer '" + L.id + "' references '" + src +
                            "', which is not an earlier layer (dangling reference or cycle)");
        }
      }
      sh.push_back(infer_layer_shape(L, ins));
      seen.emplace(L.id, i);
    }
    const auto& last = layers_.back();
    const LayerKind want = head_ == HeadKind::simcc ? LayerKind::simcc_head : LayerKind::heatmap_head;
    if (last.kind != want) {
      throw ConfigError("graph '" + name_ + "' must terminate in a " +
                        std::string(to_string(want)) + " layer");
    }
    return sh;
  }

  static void require_single(const LayerSpec& L, const std::vector<Shape>& ins) {
    if (ins.size() != 1) throw ConfigError("layer '" + L.id + "' takes exactly one input");
  }

  static void require_channels(const LayerSpec& L, const Shape& in) {
    if (in[1] != L.in_channels) {
      throw DimensionError("layer '" + L.id + "' expects " + std::to_string(L.in_channels) +
                           " input channels (axis 1), got " + std::to_string(in[1]));
    }
  }

  static Shape infer_layer_shape(const LayerSpec& L, const std::vector<Shape>& ins) {
    switch (L.kind) {
      case LayerKind::conv: {
        require_single(L, ins);
        require_channels(L, ins[0]);
        return conv_output_shape(ins[0],
                                 {L.out_channels, L.in_channels / std::size_t(std::max<std::int64_t>(1, L.groups)),
                                  L.kernel, L.kernel},
                                 L.conv_params());
      }
      case LayerKind::deconv: {
        require_single(L, ins);
        require_channels(L, ins[0]);
        if (L.groups < 1 || L.out_channels % std::size_t(L.groups) != 0) {
          throw ConfigError("layer '" + L.id + "': groups do not divide output channels");
        }
        return deconv_output_shape(
            ins[0], {L.in_channels, L.out_channels / std::size_t(L.groups), L.kernel, L.kernel},
            L.deconv_params());
      }
      case LayerKind::upsample: {
        require_single(L, ins);
        if (L.scale < 2) throw ConfigError("layer '" + L.id + "': upsample scale must be >= 2");
        const auto s = std::size_t(L.scale);
        return {ins[0][0], ins[0][1], ins[0][2] * s, ins[0][3] * s};
      }
      case LayerKind::activation:
        require_single(L, ins);
        return ins[0];
      case LayerKind::add: {
        if (ins.size() < 2) throw ConfigError("add layer '" + L.id + "' needs >= 2 inputs");
        for (const auto& s : ins) {
          if (s != ins[0]) {
            throw DimensionError("add layer '" + L.id + "' has mismatched operand shapes " +
                                 shape_str(ins[0]) + " and " + shape_str(s));
          }
        }
        return ins[0];
      }
      case LayerKind::concat: {
        if (ins.size() < 2) throw ConfigError("concat layer '" + L.id + "' needs >= 2 inputs");
        Shape out = ins[0];
        for (std::size_t j = 1; j < ins.size(); ++j) {
          const auto& s = ins[j];
          if (s[0] != out[0] || s[2] != out[2] || s[3] != out[3]) {
            throw DimensionError("concat layer '" + L.id +
                                 "' operands differ outside the channel axis: " +
                                 shape_str(ins[0]) + " vs " + shape_str(s));
          }
          out[1] += s[1];
        }
        return out;
      }
      case LayerKind::simcc_head: {
        require_single(L, ins);
        require_channels(L, ins[0]);
        if (L.simcc_x == 0 || L.simcc_y == 0) {
          throw ConfigError("simcc_head '" + L.id + "' needs positive vector lengths");
        }
        return {ins[0][0], ins[0][1], L.simcc_x + L.simcc_y};
      }
      case LayerKind::heatmap_head: {
        require_single(L, ins);
        require_channels(L, ins[0]);
        return {ins[0][0], L.out_channels, ins[0][2], ins[0][3]};
      }
    }
    throw ConfigError("unhandled layer kind");
  }

  std::string name_;
  HeadKind head_ = HeadKind::simcc;
  Shape input_shape_;
  std::vector<LayerSpec> layers_;
  std::vector<std::optional<BoundLayer>> bound_;
  std::map<std::string, Tensor> raw_;
  mutable std::vector<Shape> shapes_;
};

// Architecture description as JSON (weights are not included).
inline nlohmann::json graph_to_json(const Graph& g) {
  nlohmann::json j;
  j["name"] = g.name();
  j["head"] = g.head() == HeadKind::simcc ? "simcc" : "heatmap";
  j["input_shape"] = g.input_shape();
  auto& layers = j["layers"] = nlohmann::json::array();
  for (const auto& L : g.layers()) {
    nlohmann::json l{{"id", L.id}, {"kind", to_string(L.kind)}, {"inputs", L.inputs}};
    switch (L.kind) {
      case LayerKind::conv:
      case LayerKind::deconv:
        l["in_channels"] = L.in_channels;
        l["out_channels"] = L.out_channels;
        l["kernel"] = L.kernel;
        l["stride"] = L.stride;
        l["padding"] = L.padding;
        if (L.kind == LayerKind::deconv) l["output_padding"] = L.output_padding;
        if (L.kind == LayerKind::conv) l["dilation"] = L.dilation;
        l["groups"] = L.groups;
        l["bias"] = L.bias;
        l["batch_norm"] = L.batch_norm;
        l["act"] = ops::to_string(L.act);
        break;
      case LayerKind::upsample:
        l["scale"] = L.scale;
        break;
      case LayerKind::activation:
        l["act"] = ops::to_string(L.act);
        break;
      case LayerKind::simcc_head:
        l["in_channels"] = L.in_channels;
        l["simcc_x"] = L.simcc_x;
        l["simcc_y"] = L.simcc_y;
        break;
      case LayerKind::heatmap_head:
        l["in_channels"] = L.in_channels;
        l["out_channels"] = L.out_channels;
        break;
      default:
        break;
    }
    layers.push_back(std::move(l));
  }
  return j;
}

inline Graph graph_from_json(const nlohmann::json& j) {
  try {
    const std::string head = j.at("head").get<std::string>();
    if (head != "simcc" && head != "heatmap") throw ConfigError("unknown head '" + head + "'");
    Graph g(j.at("name").get<std::string>(),
            head == "simcc" ? HeadKind::simcc : HeadKind::heatmap,
            j.at("input_shape").get<Shape>());
    for (const auto& l : j.at("layers")) {
      LayerSpec L;
      L.id = l.at("id").get<std::string>();
      L.kind = parse_layer_kind(l.at("kind").get<std::string>());
      L.inputs = l.at("inputs").get<std::vector<std::string>>();
      L.in_channels = l.value("in_channels", std::size_t{0});
      L.out_channels = l.value("out_channels", std::size_t{0});
      L.kernel = l.value("kernel", std::size_t{1});
      L.stride = l.value("stride", std::int64_t{1});
      L.padding = l.value("padding", std::int64_t{0});
      L.output_padding = l.value("output_padding", std::int64_t{0});
      L.dilation = l.value("dilation", std::int64_t{1});
      L.groups = l.value("groups", std::int64_t{1});
      L.bias = l.value("bias", true);
      L.batch_norm = l.value("batch_norm", false);
      L.act = ops::parse_activation(l.value("act", std::string("identity")));
      L.scale = l.value("scale", std::int64_t{2});
      L.simcc_x = l.value("simcc_x", std::size_t{0});
      L.simcc_y = l.value("simcc_y", std::size_t{0});
      g.add_layer(std::move(L));
    }
    g.validate();
    return g;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed graph description: ") + e.what());
  }
}

}  // namespace posekit::model
