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

#include <array>
#include <cmath>
#include <string>

#include "posekit/core/error.hpp"
#include "posekit/decode/prediction.hpp"

namespace posekit::decode {

// 2x3 matrix taking crop coordinates to original-image coordinates:
//   [x']   [a b c] [x]
//   [y'] = [d e f] [y]
//                  [1]
class AffineTransform {
 public:
  AffineTransform() = default;

  AffineTransform(double a, double b, double c, double d, double e, double f)
      : m_{a, b, c, d, e, f} {
    const double det = determinant();
    if (!std::isfinite(det) || std::abs(det) < 1e-12) {
      throw ConfigError("affine transform is not invertible (determinant " +
                        std::to_string(det) + ")");
    }
    for (double v : m_) {
      if (!std::isfinite(v)) throw ConfigError("affine transform has non-finite entries");
    }
  }

  static AffineTransform identity() { return {}; }
  static AffineTransform translation(double tx, double ty) { return {1, 0, tx, 0, 1, ty}; }
  static AffineTransform scale_about(double s, double cx, double cy) {
    return {s, 0, cx - s * cx, 0, s, cy - s * cy};
  }

  const std::array<double, 6>& matrix() const { return m_; }
  double operator()(int r, int c) const { return m_[std::size_t(r * 3 + c)]; }
  double determinant() const { return m_[0] * m_[4] - m_[1] * m_[3]; }

  std::array<double, 2> apply(double x, double y) const {
    return {m_[0] * x + m_[1] * y + m_[2], m_[3] * x + m_[4] * y + m_[5]};
  }

  AffineTransform inverse() const {
    const double det = determinant();
    const double a = m_[4] / det, b = -m_[1] / det, d = -m_[3] / det, e = m_[0] / det;
    return {a, b, -(a * m_[2] + b * m_[5]), d, e, -(d * m_[2] + e * m_[5])};
  }

  // (this * other)(p) = this(other(p)).
  AffineTransform compose(const AffineTransform& o) const {
    const auto& n = o.m_;
    return {m_[0] * n[0] + m_[1] * n[3],
            m_[0] * n[1] + m_[1] * n[4],
            m_[0] * n[2] + m_[1] * n[5] + m_[2],
            m_[3] * n[0] + m_[4] * n[3],
            m_[3] * n[1] + m_[4] * n[4],
            m_[3] * n[2] + m_[4] * n[5] + m_[5]};
  }

 private:
  std::array<double, 6> m_{1, 0, 0, 0, 1, 0};
};

// Moves a crop-frame prediction into original-image coordinates.
inline PosePrediction unmap_coords(const PosePrediction& pred, const AffineTransform& t) {
  if (pred.frame != Frame::crop) {
    throw InputError("unmap_coords expects a crop-frame prediction");
  }
  PosePrediction out = pred;
  for (auto& k : out.keypoints) {
    const auto p = t.apply(k.x, k.y);
    k.x = p[0];
    k.y = p[1];
  }
  out.frame = Frame::original;
  return out;
}

}  // namespace posekit::decode
