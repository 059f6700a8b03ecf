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

// Top-down single-person inference:
//   box -> crop transform -> preprocess -> forward [-> mirrored forward, fuse]
//   -> decode -> original-image coordinates.
//
// Flip convention: the mirrored pass is undone by reversing x-vectors or
// heatmap columns. Under integer pixel centres that reversal maps crop
// coordinate u to W - 1/k - u for SimCC (W - stride - u for heatmaps)
// rather than W - 1 - u, so for a perfectly equivariant model the two
// passes' peaks sit (1 - 1/k) crop pixels apart ((stride - 1) for heatmaps).

#include <atomic>
#include <cmath>
#include <cstddef>

#include "posekit/core/error.hpp"
#include "posekit/decode/affine.hpp"
#include "posekit/decode/dark.hpp"
#include "posekit/decode/flip.hpp"
#include "posekit/decode/simcc.hpp"
#include "posekit/model/forward.hpp"
#include "posekit/pipeline/preprocess.hpp"

namespace posekit::pipeline {

struct InferOptions {
  bool flip_test = false;
  decode::FlipPairs flip_pairs;
  PreprocessSpec spec;  // crop size is taken from the graph
};

// Counts forward passes; shared by concurrent callers.
struct InferTrace {
  std::atomic<std::size_t> forward_calls{0};
};

namespace detail {

inline void require_finite(const Tensor& t, const char* what) {
  for (float v : t.data()) {
    if (!std::isfinite(v)) throw InferenceError(std::string(what) + " contains non-finite values");
  }
}

inline model::HeadOutput counted_forward(const model::Graph& g, const Tensor& x, InferTrace* trace) {
  if (trace) trace->forward_calls.fetch_add(1, std::memory_order_relaxed);
  return model::forward(g, x);
}

}  // namespace detail

// Decodes raw head outputs (plus the mirrored pass when present) in crop pixels.
inline decode::PosePrediction decode_head(const model::HeadOutput& out,
                                          const model::HeadOutput* flipped,
                                          const decode::FlipPairs& pairs, std::size_t crop_w,
                                          std::size_t crop_h) {
  if (out.kind == model::HeadKind::simcc) {
    detail::require_finite(out.simcc_x, "simcc x output");
    detail::require_finite(out.simcc_y, "simcc y output");
    decode::SimccOutput s = decode::simcc_sample(out.simcc_x, out.simcc_y, 0, out.split_factor);
    if (s.width != crop_w || s.height != crop_h) {
      throw DimensionError("simcc vectors cover " + std::to_string(s.width) + "x" +
                           std::to_string(s.height) + " but the crop is " +
                           std::to_string(crop_w) + "x" + std::to_string(crop_h));
    }
    if (flipped) {
      s = decode::flip_fuse(
          s, decode::simcc_sample(flipped->simcc_x, flipped->simcc_y, 0, flipped->split_factor),
          pairs);
    }
    return decode::simcc_decode(s);
  }
  detail::require_finite(out.heatmaps, "heatmap output");
  Tensor maps = out.heatmaps;
  if (flipped) maps = decode::flip_fuse(maps, flipped->heatmaps, pairs);
  return decode::dark_decode(maps, double(out.stride));
}

inline decode::PosePrediction infer_person(const model::Graph& g, const Image& img,
                                           const PersonBox& box, const InferOptions& opts,
                                           InferTrace* trace = nullptr) {
  const Shape& in = g.input_shape();
  if (in[0] != 1 || in[1] != 3) {
    throw DimensionError("pipeline expects a (1, 3, H, W) graph input, got " + shape_str(in));
  }
  PreprocessSpec spec = opts.spec;
  spec.height = in[2];
  spec.width = in[3];
  const decode::AffineTransform t = compute_affine(box, spec);
  const Tensor crop = preprocess(img, t, spec);

  const model::HeadOutput out = detail::counted_forward(g, crop, trace);
  decode::PosePrediction pred;
  if (opts.flip_test) {
    const model::HeadOutput flipped = detail::counted_forward(g, mirror_columns(crop), trace);
    pred = decode_head(out, &flipped, opts.flip_pairs, spec.width, spec.height);
  } else {
    pred = decode_head(out, nullptr, opts.flip_pairs, spec.width, spec.height);
  }
  return decode::unmap_coords(pred, t);
}

}  // namespace posekit::pipeline
