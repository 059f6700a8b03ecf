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
#include <cstdint>
#include <string>

#include "posekit/core/error.hpp"
#include "posekit/core/tensor.hpp"

namespace posekit {

struct Pair {
  std::int64_t h = 0;
  std::int64_t w = 0;
  friend bool operator==(const Pair&, const Pair&) = default;
};

struct ConvParams {
  Pair stride{1, 1};
  Pair padding{0, 0};
  Pair dilation{1, 1};
  std::int64_t groups = 1;

  void validate() const {
    if (stride.h < 1 || stride.w < 1) throw ConfigError("conv stride must be >= 1");
    if (padding.h < 0 || padding.w < 0) throw ConfigError("conv padding must be >= 0");
    if (dilation.h < 1 || dilation.w < 1) throw ConfigError("conv dilation must be >= 1");
    if (groups < 1) throw ConfigError("conv groups must be >= 1");
  }
};

struct DeconvParams {
  Pair stride{1, 1};
  Pair padding{0, 0};
  Pair output_padding{0, 0};
  std::int64_t groups = 1;

  void validate() const {
    if (stride.h < 1 || stride.w < 1) throw ConfigError("deconv stride must be >= 1");
    if (padding.h < 0 || padding.w < 0) throw ConfigError("deconv padding must be >= 0");
    if (output_padding.h < 0 || output_padding.w < 0 ||
        output_padding.h >= stride.h || output_padding.w >= stride.w) {
      throw ConfigError("deconv output_padding must lie in [0, stride)");
    }
    if (groups < 1) throw ConfigError("deconv groups must be >= 1");
  }
};

// floor((in + 2*pad - dil*(k-1) - 1) / stride) + 1; non-positive results are
// configuration errors.
inline std::size_t conv_out_extent(std::size_t in, std::size_t k, std::int64_t stride,
                                   std::int64_t pad, std::int64_t dil,
                                   const char* axis) {
  const std::int64_t span = std::int64_t(in) + 2 * pad - dil * (std::int64_t(k) - 1) - 1;
  if (span < 0) {
    throw ConfigError(std::string("conv output extent along ") + axis +
                      " is not positive");
  }
  return std::size_t(span / stride + 1);
}

// (in - 1)*stride - 2*pad + k + output_padding
inline std::size_t deconv_out_extent(std::size_t in, std::size_t k, std::int64_t stride,
                                     std::int64_t pad, std::int64_t out_pad,
                                     const char* axis) {
  const std::int64_t out =
      (std::int64_t(in) - 1) * stride - 2 * pad + std::int64_t(k) + out_pad;
  if (out <= 0) {
    throw ConfigError(std::string("deconv output extent along ") + axis +
                      " is not positive");
  }
  return std::size_t(out);
}

// Validates an (N, Cin, H, W) input against a (Cout, Cin/groups, Kh, Kw)
// weight and an optional bias, returning the output shape.
inline Shape conv_output_shape(const Shape& input, const Shape& weight,
                               const ConvParams& p) {
  p.validate();
  if (input.size() != 4) throw DimensionError("conv input must be 4-D (N, C, H, W)");
  if (weight.size() != 4) throw DimensionError("conv weight must be 4-D (Cout, Cin/groups, Kh, Kw)");
  const auto g = std::size_t(p.groups);
  if (input[1] % g != 0) {
    throw ConfigError("groups " + std::to_string(g) + " does not divide input channels " +
                      std::to_string(input[1]));
  }
  if (weight[0] % g != 0) {
    throw ConfigError("groups " + std::to_string(g) + " does not divide output channels " +
                      std::to_string(weight[0]));
  }
  if (weight[1] != input[1] / g) {
    throw DimensionError("weight axis 1 (Cin/groups) is " + std::to_string(weight[1]) +
                         " but input channels/groups is " + std::to_string(input[1] / g));
  }
  return {input[0], weight[0],
          conv_out_extent(input[2], weight[2], p.stride.h, p.padding.h, p.dilation.h, "height"),
          conv_out_extent(input[3], weight[3], p.stride.w, p.padding.w, p.dilation.w, "width")};
}

// Validates an (N, Cin, H, W) input against a (Cin, Cout/groups, Kh, Kw)
// transposed-convolution weight.
inline Shape deconv_output_shape(const Shape& input, const Shape& weight,
                                 const DeconvParams& p) {
  p.validate();
  if (input.size() != 4) throw DimensionError("deconv input must be 4-D (N, C, H, W)");
  if (weight.size() != 4) throw DimensionError("deconv weight must be 4-D (Cin, Cout/groups, Kh, Kw)");
  const auto g = std::size_t(p.groups);
  if (input[1] % g != 0) {
    throw ConfigError("groups " + std::to_string(g) + " does not divide input channels " +
                      std::to_string(input[1]));
  }
  if (weight[0] != input[1]) {
    throw DimensionError("weight axis 0 (Cin) is " + std::to_string(weight[0]) +
                         " but input has " + std::to_string(input[1]) + " channels");
  }
  return {input[0], weight[1] * g,
          deconv_out_extent(input[2], weight[2], p.stride.h, p.padding.h, p.output_padding.h, "height"),
          deconv_out_extent(input[3], weight[3], p.stride.w, p.padding.w, p.output_padding.w, "width")};
}

inline void check_bias(const Tensor* bias, std::size_t cout) {
  if (bias != nullptr && bias->size() != cout) {
    throw DimensionError("bias length " + std::to_string(bias->size()) +
                         " does not match output channels " + std::to_string(cout));
  }
}

}  // namespace posekit
