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
#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "posekit/decode/prediction.hpp"

namespace posekit::eval {

// Visibility: 0 unlabeled (position meaningless), 1 labeled but occluded, 2 visible.
struct GtKeypoint {
  double x = 0.0;
  double y = 0.0;
  int v = 0;
};

struct Annotation {
  std::int64_t id = 0;
  std::int64_t image_id = 0;
  std::int64_t category_id = 1;
  std::vector<GtKeypoint> keypoints;
  double area = 0.0;                       // pixels^2; OKS scale
  std::array<double, 4> bbox{0, 0, 0, 0};  // x, y, w, h
  bool iscrowd = false;
  std::optional<std::array<double, 4>> head_box;  // x1, y1, x2, y2

  std::size_t num_labeled() const {
    std::size_t n = 0;
    for (const auto& k : keypoints) n += k.v > 0;
    return n;
  }
};

struct ImageInfo {
  std::int64_t id = 0;
  std::int64_t width = 0;
  std::int64_t height = 0;
  std::string file_name;
};

struct AnnotationSet {
  std::vector<ImageInfo> images;
  std::vector<Annotation> annotations;
  std::vector<std::string> keypoint_names;
  std::vector<std::array<std::size_t, 2>> skeleton;
};

// One person prediction in COCO results form. Keypoint triplets are
// (x, y, confidence).
struct ResultRecord {
  std::int64_t image_id = 0;
  std::int64_t category_id = 1;
  std::vector<decode::Keypoint> keypoints;
  double score = 0.0;
  std::optional<std::int64_t> annotation_id;

  // Area of the keypoints' bounding rectangle; used for area-range filtering
  // of unmatched predictions.
  double keypoint_extent_area() const {
    if (keypoints.empty()) return 0.0;
    double x0 = keypoints[0].x, x1 = x0, y0 = keypoints[0].y, y1 = y0;
    for (const auto& k : keypoints) {
      x0 = std::min(x0, k.x);
      x1 = std::max(x1, k.x);
      y0 = std::min(y0, k.y);
      y1 = std::max(y1, k.y);
    }
    return (x1 - x0) * (y1 - y0);
  }
};

}  // namespace posekit::eval
