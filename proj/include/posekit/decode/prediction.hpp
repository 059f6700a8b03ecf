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
#include <string_view>
#include <vector>

#include "posekit/core/error.hpp"

namespace posekit::decode {

enum class Frame { crop, original };

inline constexpr std::string_view to_string(Frame f) {
  return f == Frame::crop ? "crop" : "original";
}

struct Keypoint {
  double x = 0.0;
  double y = 0.0;
  double score = 0.0;  // in [0, 1]
};

struct PosePrediction {
  std::vector<Keypoint> keypoints;
  Frame frame = Frame::crop;

  std::size_t size() const { return keypoints.size(); }

  // Mean keypoint score; used as the per-person detection score.
  double mean_score() const {
    if (keypoints.empty()) return 0.0;
    double s = 0.0;
    for (const auto& k : keypoints) s += k.score;
    return s / double(keypoints.size());
  }
};

}  // namespace posekit::decode
