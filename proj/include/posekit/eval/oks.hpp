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

// Object keypoint similarity:
// mean over labeled keypoints of exp(-dist^2 / (2 * area * falloff^2)), where
// dist is the prediction-to-truth distance and falloff is per keypoint.

#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "posekit/core/error.hpp"
#include "posekit/decode/prediction.hpp"
#include "posekit/eval/annotation.hpp"

namespace posekit::eval {

struct OksConfig {
  std::vector<double> falloff;  // one per keypoint

  void validate() const {
    if (falloff.empty()) throw ConfigError("OKS falloff constants are empty");
    for (std::size_t i = 0; i < falloff.size(); ++i) {
      if (!(falloff[i] > 0.0) || !std::isfinite(falloff[i])) {
        throw ConfigError("OKS falloff constant " + std::to_string(i) + " must be positive");
      }
    }
  }

  // Twice the usual COCO-17 per-keypoint sigmas.
  static OksConfig coco17() {
    const double sigmas[17] = {.26, .25, .25, .35, .35, .79, .79, .72, .72,
                               .62, .62, 1.07, 1.07, .87, .87, .89, .89};
    OksConfig c;
    for (double s : sigmas) c.falloff.push_back(2.0 * s / 10.0);
    return c;
  }
};

inline double oks(std::span<const decode::Keypoint> pred, const Annotation& gt,
                  const OksConfig& cfg) {
  const std::size_t K = gt.keypoints.size();
  if (pred.size() != K || cfg.falloff.size() != K) {
    throw DimensionError("OKS needs matching keypoint counts: prediction " +
                         std::to_string(pred.size()) + ", annotation " + std::to_string(K) +
                         ", constants " + std::to_string(cfg.falloff.size()));
  }
  std::size_t labeled = 0;
  double sum = 0.0;
  for (std::size_t i = 0; i < K; ++i) {
    if (gt.keypoints[i].v <= 0) continue;
    ++labeled;
    const double dx = pred[i].x - gt.keypoints[i].x, dy = pred[i].y - gt.keypoints[i].y;
    const double j = cfg.falloff[i];
    sum += std::exp(-(dx * dx + dy * dy) / (2.0 * gt.area * j * j));
  }
  if (labeled == 0) {
    throw NoLabeledKeypoints("annotation " + std::to_string(gt.id) + " has no labeled keypoints");
  }
  if (!(gt.area > 0.0)) {
    throw InputError("annotation " + std::to_string(gt.id) + " has labeled keypoints but area " +
                     std::to_string(gt.area));
  }
  return sum / double(labeled);
}

}  // namespace posekit::eval
