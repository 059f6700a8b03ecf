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

#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "posekit/decode/affine.hpp"
#include "posekit/decode/dark.hpp"
#include "posekit/decode/flip.hpp"
#include "posekit/decode/simcc.hpp"
#include "oracles/decode_oracle.hpp"

using namespace posekit;
using namespace posekit::decode;
using oracle::gaussian_map;
using oracle::scan_argmax;

namespace {

SimccOutput one_hot(std::size_t width, std::size_t height, std::size_t k, std::size_t ix,
                    std::size_t iy) {
  Tensor x({1, width * k}, 0.0f), y({1, height * k}, 0.0f);
  x[ix] = 1.0f;
  y[iy] = 1.0f;
  return SimccOutput(std::move(x), std::move(y), k, width, height);
}

}  // namespace

TEST(SimccDecode, OneHotExamples) {
  PosePrediction p = simcc_decode(one_hot(256, 256, 2, 300, 120));
  EXPECT_EQ(p.frame, Frame::crop);
  EXPECT_EQ(p.keypoints[0].x, 150.0);
  EXPECT_EQ(p.keypoints[0].y, 60.0);

  PosePrediction q = simcc_decode(one_hot(64, 64, 1, 37, 3));
  EXPECT_EQ(q.keypoints[0].x, 37.0);
  EXPECT_EQ(q.keypoints[0].y, 3.0);
}

TEST(SimccDecode, MatchesLinearScanOracle) {
  std::mt19937 rng(2024);
  std::uniform_real_distribution<float> u(0.0f, 1.0f);
  for (std::size_t k : {1u, 2u, 4u}) {
    for (int trial = 0; trial < 1000; ++trial) {
      const std::size_t w = 1 + rng() % 40, h = 1 + rng() % 40;
      std::vector<float> vx(w * k), vy(h * k);
      for (auto& v : vx) v = u(rng);
      for (auto& v : vy) v = u(rng);
      SimccOutput s(Tensor({1, w * k}, vx), Tensor({1, h * k}, vy), k, w, h);
      const Keypoint kp = simcc_decode(s).keypoints[0];
      EXPECT_EQ(kp.x, double(scan_argmax(vx)) / double(k));
      EXPECT_EQ(kp.y, double(scan_argmax(vy)) / double(k));
      EXPECT_GE(kp.score, 0.0);
      EXPECT_LE(kp.score, 1.0);
    }
  }
}

TEST(SimccDecode, TiesBreakToLowestIndex) {
  Tensor x({1, 8}, std::vector<float>{0, 3, 1, 3, 3, 0, 0, 0});
  Tensor y({1, 8}, 2.0f);
  const Keypoint kp = simcc_decode(SimccOutput(x, y, 2, 4, 4)).keypoints[0];
  EXPECT_EQ(kp.x, 0.5);
  EXPECT_EQ(kp.y, 0.0);
}

TEST(SimccDecode, InvariantUnderMonotoneTransforms) {
  // Integer-valued vectors with frequent ties; every transform is exact in float.
  std::mt19937 rng(5);
  const std::vector<float (*)(float)> transforms = {
      [](float v) { return 3.0f * v + 7.0f; },
      [](float v) { return v * v * v; },
      [](float v) { return float(std::exp(double(v) / 50.0)); },
  };
  for (int trial = 0; trial < 500; ++trial) {
    const std::size_t k = 1 + rng() % 4, w = 1 + rng() % 30;
    std::vector<float> vx(w * k), vy(w * k);
    for (auto& v : vx) v = float(int(rng() % 401) - 200);
    for (auto& v : vy) v = float(int(rng() % 21) - 10);
    const Keypoint base = simcc_decode(SimccOutput(Tensor({1, w * k}, vx), Tensor({1, w * k}, vy), k, w, w)).keypoints[0];
    for (auto f : transforms) {
      auto fx = vx, fy = vy;
      for (auto& v : fx) v = f(v);
      for (auto& v : fy) v = f(v);
      const Keypoint t = simcc_decode(SimccOutput(Tensor({1, w * k}, fx), Tensor({1, w * k}, fy), k, w, w)).keypoints[0];
      EXPECT_EQ(t.x, base.x);
      EXPECT_EQ(t.y, base.y);
    }
  }
}

TEST(SimccDecode, ScoreIsProductOfSoftmaxPeaks) {
  Tensor x({1, 4}, 0.0f), y({1, 4}, std::vector<float>{0, 0, std::log(2.0f), 0});
  const Keypoint kp = simcc_decode(SimccOutput(x, y, 1, 4, 4)).keypoints[0];
  EXPECT_NEAR(kp.score, 0.25 * 0.4, 1e-7);
  EXPECT_EQ(kp.y, 2.0);
}

TEST(SimccDecode, Errors) {
  EXPECT_THROW(argmax(std::span<const float>{}), DimensionError);
  EXPECT_THROW(softmax_peak(std::span<const float>{}), DimensionError);
  EXPECT_THROW(SimccOutput(Tensor({1, 10}), Tensor({1, 8}), 2, 4, 4), DimensionError);
  EXPECT_THROW(SimccOutput(Tensor({2, 8}), Tensor({1, 8}), 2, 4, 4), DimensionError);
  EXPECT_THROW(SimccOutput(Tensor({1, 8}), Tensor({1, 8}), 0, 4, 4), ConfigError);
}

TEST(SimccDecode, SampleSlicesBatch) {
  Tensor ox({2, 1, 4}, std::vector<float>{0, 1, 0, 0, 0, 0, 0, 1});
  Tensor oy({2, 1, 4}, std::vector<float>{1, 0, 0, 0, 0, 0, 1, 0});
  const Keypoint a = simcc_decode(simcc_sample(ox, oy, 0, 2)).keypoints[0];
  const Keypoint b = simcc_decode(simcc_sample(ox, oy, 1, 2)).keypoints[0];
  EXPECT_EQ(a.x, 0.5);
  EXPECT_EQ(a.y, 0.0);
  EXPECT_EQ(b.x, 1.5);
  EXPECT_EQ(b.y, 1.0);
}

TEST(DarkDecode, RecoversGaussianCenter) {
  const Keypoint kp = dark_decode(gaussian_map(64, 64, 10.3, 20.7, 2.0), 4.0).keypoints[0];
  EXPECT_NEAR(kp.x, 41.2, 0.05 * 4);
  EXPECT_NEAR(kp.y, 82.8, 0.05 * 4);
  EXPECT_NEAR(kp.score, 1.0, 0.2);
}

TEST(DarkDecode, RandomSubpixelGaussians) {
  std::mt19937 rng(77);
  std::uniform_real_distribution<double> center(14.0, 50.0), sigma(1.5, 3.0);
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const double cx = center(rng), cy = center(rng), s = sigma(rng);
    const Keypoint kp = dark_decode(gaussian_map(64, 64, cx, cy, s), 1.0).keypoints[0];
    worst = std::max({worst, std::abs(kp.x - cx), std::abs(kp.y - cy)});
  }
  EXPECT_LE(worst, 0.05);
}

TEST(DarkDecode, DeltaMapsAreExact) {
  Tensor t({1, 16, 16}, 0.0f);
  t[9 * 16 + 5] = 0.7f;
  const Keypoint kp = dark_decode(t, 4.0).keypoints[0];
  EXPECT_EQ(kp.x, 20.0);
  EXPECT_EQ(kp.y, 36.0);
  EXPECT_FLOAT_EQ(kp.score, 0.7f);

  std::mt19937 rng(3);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t H = 1 + rng() % 20, W = 1 + rng() % 20, x = rng() % W, y = rng() % H;
    Tensor d({1, H, W}, 0.0f);
    const float v = 0.1f + float(rng() % 100);
    d[y * W + x] = v;
    const double stride = double(1 + rng() % 8);
    const Keypoint r = dark_decode(d, stride).keypoints[0];
    EXPECT_EQ(r.x, double(x) * stride);
    EXPECT_EQ(r.y, double(y) * stride);
    EXPECT_EQ(r.score, std::min(1.0, double(v)));
  }
}

TEST(DarkDecode, TwoEqualPeaksNeverAverage) {
  Tensor a = gaussian_map(16, 16, 4, 4, 1.0), b = gaussian_map(16, 16, 12, 4, 1.0);
  Tensor two({1, 16, 16});
  for (std::size_t i = 0; i < two.size(); ++i) two[i] = std::max(a[i], b[i]);
  const Keypoint kp = dark_decode(two, 1.0).keypoints[0];
  EXPECT_NEAR(kp.x, 4.0, 0.05);
  EXPECT_NEAR(kp.y, 4.0, 0.05);
  EXPECT_GT(std::abs(kp.x - 8.0), 3.0);
}

TEST(DarkDecode, ZeroAndNegativeMaps) {
  const Keypoint z = dark_decode(Tensor({1, 8, 8}, 0.0f), 4.0).keypoints[0];
  EXPECT_EQ(z.x, 0.0);
  EXPECT_EQ(z.y, 0.0);
  EXPECT_EQ(z.score, 0.0);

  Tensor neg({1, 4, 4}, -1.0f);
  neg[6] = -0.5f;
  const Keypoint n = dark_decode(neg, 2.0).keypoints[0];
  EXPECT_EQ(n.x, 4.0);
  EXPECT_EQ(n.y, 2.0);
  EXPECT_EQ(n.score, 0.0);

  // Negative side lobes are clamped away from the average.
  Tensor lobes({1, 5, 5}, 0.0f);
  lobes[12] = 2.0f;
  lobes[11] = -5.0f;
  const Keypoint l = dark_decode(lobes, 1.0).keypoints[0];
  EXPECT_EQ(l.x, 2.0);
  EXPECT_EQ(l.score, 1.0);
}

TEST(DarkDecode, RejectsBadShapes) {
  EXPECT_THROW(dark_decode(Tensor({4, 4}), 1.0), DimensionError);
  EXPECT_THROW(dark_decode(Tensor({2, 1, 4, 4}), 1.0), DimensionError);
  EXPECT_THROW(dark_decode(Tensor({1, 4, 4}), 0.0), ConfigError);
  const PosePrediction p = dark_decode(Tensor({1, 3, 4, 4}), 1.0);
  EXPECT_EQ(p.size(), 3u);
}

TEST(FlipFuse, MirrorIsFixedPoint) {
  std::mt19937 rng(9);
  const FlipPairs pairs{{1, 2}, {3, 4}};
  Tensor x = random_tensor({5, 24}, rng), y = random_tensor({5, 20}, rng);
  SimccOutput s(x, y, 2, 12, 10);
  SimccOutput f = flip_fuse(s, mirror(s, pairs), pairs);
  EXPECT_TRUE(f.x == s.x);
  EXPECT_TRUE(f.y == s.y);

  Tensor h = random_tensor({5, 6, 7}, rng);
  EXPECT_TRUE(flip_fuse(h, mirror(h, pairs), pairs) == h);
}

TEST(FlipFuse, AveragesAfterUnflipping) {
  std::mt19937 rng(10);
  const FlipPairs pairs{{0, 3}};
  Tensor ax = random_tensor({4, 16}, rng), ay = random_tensor({4, 8}, rng);
  Tensor bx = random_tensor({4, 16}, rng), by = random_tensor({4, 8}, rng);
  SimccOutput a(ax, ay, 2, 8, 4), b(bx, by, 2, 8, 4);
  SimccOutput f = flip_fuse(a, mirror(b, pairs), pairs);
  for (std::size_t i = 0; i < ax.size(); ++i) EXPECT_EQ(f.x[i], 0.5f * (ax[i] + bx[i]));
  for (std::size_t i = 0; i < ay.size(); ++i) EXPECT_EQ(f.y[i], 0.5f * (ay[i] + by[i]));

  Tensor ha = random_tensor({1, 4, 5, 6}, rng), hb = random_tensor({1, 4, 5, 6}, rng);
  Tensor hf = flip_fuse(ha, mirror(hb, pairs), pairs);
  for (std::size_t i = 0; i < ha.size(); ++i) EXPECT_EQ(hf[i], 0.5f * (ha[i] + hb[i]));
}

TEST(FlipFuse, SymmetricInputIsIdempotent) {
  Tensor h = gaussian_map(16, 17, 8.0, 5.4, 2.0);  // symmetric about column 8
  const PosePrediction plain = dark_decode(h, 4.0);
  const PosePrediction fused = dark_decode(flip_fuse(h, mirror(h, {}), {}), 4.0);
  EXPECT_EQ(plain.keypoints[0].x, fused.keypoints[0].x);
  EXPECT_EQ(plain.keypoints[0].y, fused.keypoints[0].y);

  Tensor x({1, 9}, std::vector<float>{0, 1, 2, 3, 5, 3, 2, 1, 0}), y({1, 9}, 1.0f);
  SimccOutput s(x, y, 1, 9, 9);
  EXPECT_EQ(simcc_decode(flip_fuse(s, mirror(s, {}), {})).keypoints[0].x,
            simcc_decode(s).keypoints[0].x);
}

TEST(FlipFuse, RejectsBadPairsAndShapes) {
  Tensor h({3, 4, 4});
  EXPECT_THROW(flip_fuse(h, h, {{0, 3}}), ConfigError);
  EXPECT_THROW(flip_fuse(h, h, {{0, 1}, {1, 2}}), ConfigError);
  EXPECT_THROW(flip_fuse(h, h, {{1, 1}}), ConfigError);
  EXPECT_THROW(flip_fuse(h, Tensor({3, 4, 5}), {}), DimensionError);
  EXPECT_EQ(flip_permutation({{0, 2}}, 3), (std::vector<std::size_t>{2, 1, 0}));
}

TEST(Affine, UnmapExamples) {
  PosePrediction p;
  p.keypoints = {{1.5, 2.5, 0.9}, {8, 8, 0.1}};
  PosePrediction id = unmap_coords(p, AffineTransform::identity());
  EXPECT_EQ(id.frame, Frame::original);
  EXPECT_EQ(id.keypoints[0].x, 1.5);
  EXPECT_EQ(id.keypoints[0].y, 2.5);
  EXPECT_EQ(id.keypoints[0].score, 0.9);

  PosePrediction tr = unmap_coords(p, AffineTransform::translation(10, 20));
  EXPECT_EQ(tr.keypoints[1].x, 18.0);
  EXPECT_EQ(tr.keypoints[1].y, 28.0);

  // Crop is the original scaled by 2 about (32, 32); unmapping uses the inverse.
  const AffineTransform crop_from_orig = AffineTransform::scale_about(2.0, 32, 32);
  PosePrediction back = unmap_coords(p, crop_from_orig.inverse());
  EXPECT_NEAR(back.keypoints[1].x, 32 + (8 - 32) / 2.0, 1e-4);
  EXPECT_NEAR(back.keypoints[1].y, 20.0, 1e-4);

  EXPECT_THROW(unmap_coords(id, AffineTransform::identity()), InputError);
}

TEST(Affine, InverseRoundTripProperty) {
  std::mt19937 rng(44);
  std::uniform_real_distribution<double> u(-3.0, 3.0), pos(-500.0, 500.0);
  int checked = 0;
  while (checked < 500) {
    const double a = u(rng), b = u(rng), d = u(rng), e = u(rng);
    if (std::abs(a * e - b * d) < 0.05) continue;
    const AffineTransform t(a, b, pos(rng), d, e, pos(rng));
    const AffineTransform inv = t.inverse();
    for (int i = 0; i < 4; ++i) {
      const double x = pos(rng), y = pos(rng);
      const auto c = inv.apply(x, y);
      PosePrediction p;
      p.keypoints = {{c[0], c[1], 0.5}};
      const auto r = unmap_coords(p, t).keypoints[0];
      EXPECT_NEAR(r.x, x, 1e-4);
      EXPECT_NEAR(r.y, y, 1e-4);
    }
    const auto comp = t.compose(inv);
    for (int i = 0; i < 6; ++i) EXPECT_NEAR(comp.matrix()[i], AffineTransform().matrix()[i], 1e-9);
    ++checked;
  }
}

TEST(Affine, RejectsSingularMatrices) {
  EXPECT_THROW(AffineTransform(1, 2, 0, 2, 4, 0), ConfigError);
  EXPECT_THROW(AffineTransform(0, 0, 1, 0, 0, 1), ConfigError);
  EXPECT_THROW(AffineTransform(NAN, 0, 0, 0, 1, 0), ConfigError);
}
