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
#include <span>
#include <string>
#include <string_view>

#include "posekit/core/error.hpp"
#include "posekit/core/tensor.hpp"

namespace posekit::ops {

enum class Activation { identity, relu, relu6 };

inline std::string_view to_string(Activation a) {
  switch (a) {
    case Activation::relu: return "relu";
    case Activation::relu6: return "relu6";
    case Activation::identity: break;
  }
  return "identity";
}

inline Activation parse_activation(std::string_view s) {
  if (s == "relu") return Activation::relu;
  if (s == "relu6") return Activation::relu6;
  if (s == "identity" || s == "none") return Activation::identity;
  throw ConfigError("unknown activation '" + std::string(s) + "'");
}

inline void activate_inplace(std::span<float> v, Activation kind) {
  switch (kind) {
    case Activation::relu:
      for (auto& x : v) x = std::max(x, 0.0f);
      break;
    case Activation::relu6:
      for (auto& x : v) x = std::clamp(x, 0.0f, 6.0f);
      break;
    case Activation::identity:
      break;
  }
}

inline Tensor apply_activation(const Tensor& input, Activation kind) {
  Tensor out = input;
  activate_inplace(out.data(), kind);
  return out;
}

}  // namespace posekit::ops
