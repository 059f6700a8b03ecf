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

// COCO-style keypoint AP.
//
// Per image and per (area range, OKS threshold):
//   - ground truths are ignored when crowd, without labeled keypoints, or
//     outside the area range (lo < area <= hi)
//   - predictions are ordered by score (descending; equal scores by keypoint
//     coordinates) and truncated to max_dets
//   - each prediction takes the unmatched non-ignored gt with the highest
//     OKS >= threshold (lowest index on ties); failing that, an ignored gt,
//     which removes it from the count
//   - unmatched predictions whose keypoint extent lies outside the area
//     range are dropped
// Across images, kept predictions are sorted by score. Predictions with
// equal scores form one step of the precision/recall curve, so the result
// does not depend on input order. Precision is made monotone from the
// right and read at 101 recall points 0, 0.01, ..., 1.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdio>
#include <limits>
#include <map>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "posekit/core/error.hpp"
#include "posekit/core/parallel.hpp"
#include "posekit/eval/annotation.hpp"
#include "posekit/eval/oks.hpp"

namespace posekit::eval {

struct AreaRange {
  std::string name;
  double lo = -std::numeric_limits<double>::infinity();  // exclusive
  double hi = std::numeric_limits<double>::infinity();   // inclusive

  bool contains(double area) const { return area > lo && area <= hi; }
};

struct CocoEvalOptions {
  std::vector<double> thresholds;
  std::size_t max_dets = 20;
  std::vector<AreaRange> ranges;

  CocoEvalOptions() {
    for (int i = 0; i < 10; ++i) thresholds.push_back(0.5 + 0.05 * i);
    ranges = {{"all"}, {"medium", 32.0 * 32.0, 96.0 * 96.0}, {"large", 96.0 * 96.0}};
  }
};

inline constexpr std::size_t kRecallPoints = 101;

struct ThresholdResult {
  double threshold = 0.0;
  double ap = 0.0;  // NaN when the range has no ground truth
  std::vector<double> precision;  // at the 101 recall points
  double max_recall = 0.0;
  std::size_t true_positives = 0;
  std::size_t false_positives = 0;
};

struct RangeResult {
  AreaRange range;
  std::size_t num_gt = 0;
  std::vector<ThresholdResult> thresholds;
  double mean_ap = 0.0;  // NaN when undefined
};

struct APReport {
  double ap = 0.0;
  double ap50 = 0.0;
  double ap75 = 0.0;
  double ap_m = 0.0;
  double ap_l = 0.0;
  std::vector<RangeResult> ranges;
  std::size_t images = 0;
  std::size_t ground_truths = 0;
  std::size_t predictions = 0;
};

// Ordering used for predictions everywhere: higher score first, then
// lexicographically smaller keypoint coordinates.
inline bool prediction_before(const ResultRecord& a, const ResultRecord& b) {
  if (a.score != b.score) return a.score > b.score;
  for (std::size_t i = 0; i < std::min(a.keypoints.size(), b.keypoints.size()); ++i) {
    if (a.keypoints[i].x != b.keypoints[i].x) return a.keypoints[i].x < b.keypoints[i].x;
    if (a.keypoints[i].y != b.keypoints[i].y) return a.keypoints[i].y < b.keypoints[i].y;
  }
  return false;
}

// Interpolated precision at 101 recall points from (score, is_tp) pairs.
inline ThresholdResult integrate_precision(std::vector<std::pair<double, bool>> dets,
                                           std::size_t num_gt, double threshold) {
  ThresholdResult r;
  r.threshold = threshold;
  r.precision.assign(kRecallPoints, 0.0);
  std::stable_sort(dets.begin(), dets.end(),
                   [](const auto& a, const auto& b) { return a.first > b.first; });
  std::vector<double> recall, precision;
  std::size_t tp = 0, fp = 0;
  for (std::size_t i = 0; i < dets.size();) {
    std::size_t j = i;
    while (j < dets.size() && dets[j].first == dets[i].first) {
      (dets[j].second ? tp : fp)++;
      ++j;
    }
    recall.push_back(num_gt ? double(tp) / double(num_gt) : 0.0);
    precision.push_back(double(tp) / double(tp + fp));
    i = j;
  }
  r.true_positives = tp;
  r.false_positives = fp;
  if (num_gt == 0) {
    r.ap = std::numeric_limits<double>::quiet_NaN();
    return r;
  }
  r.max_recall = recall.empty() ? 0.0 : recall.back();
  for (std::size_t i = precision.size(); i-- > 1;) {
    precision[i - 1] = std::max(precision[i - 1], precision[i]);
  }
  double sum = 0.0;
  for (std::size_t q = 0; q < kRecallPoints; ++q) {
    const double level = double(q) / double(kRecallPoints - 1);
    const auto it = std::lower_bound(recall.begin(), recall.end(), level);
    if (it != recall.end()) r.precision[q] = precision[std::size_t(it - recall.begin())];
    sum += r.precision[q];
  }
  r.ap = sum / double(kRecallPoints);
  return r;
}

inline APReport evaluate_coco(const std::vector<ResultRecord>& results, const AnnotationSet& gts,
                              const OksConfig& cfg, const CocoEvalOptions& opt = {}) {
  cfg.validate();
  std::set<std::int64_t> known;
  for (const auto& im : gts.images) known.insert(im.id);
  for (const auto& a : gts.annotations) {
    if (gts.images.empty()) known.insert(a.image_id);
    if (a.keypoints.size() != cfg.falloff.size()) {
      throw IngestionError("annotation " + std::to_string(a.id) + " has " +
                           std::to_string(a.keypoints.size()) + " keypoints; OKS constants cover " +
                           std::to_string(cfg.falloff.size()));
    }
  }
  std::map<std::int64_t, std::size_t> slot;
  for (auto id : known) slot.emplace(id, slot.size());
  std::vector<std::vector<const Annotation*>> img_gts(slot.size());
  std::vector<std::vector<const ResultRecord*>> img_dts(slot.size());
  for (const auto& a : gts.annotations) {
    auto it = slot.find(a.image_id);
    if (it == slot.end()) {
      throw IngestionError("annotation " + std::to_string(a.id) + " references unknown image " +
                           std::to_string(a.image_id));
    }
    img_gts[it->second].push_back(&a);
  }
  for (std::size_t i = 0; i < results.size(); ++i) {
    const auto& r = results[i];
    auto it = slot.find(r.image_id);
    if (it == slot.end()) {
      throw IngestionError("result " + std::to_string(i) + " references unknown image id " +
                           std::to_string(r.image_id));
    }
    if (r.keypoints.size() != cfg.falloff.size()) {
      throw IngestionError("result " + std::to_string(i) + " has " +
                           std::to_string(r.keypoints.size()) + " keypoints; expected " +
                           std::to_string(cfg.falloff.size()));
    }
    img_dts[it->second].push_back(&r);
  }

  const std::size_t R = opt.ranges.size(), T = opt.thresholds.size(), N = slot.size();
  // Per image, range, threshold: kept (score, is_tp) pairs and gt count.
  struct Cell {
    std::vector<std::pair<double, bool>> dets;
    std::size_t num_gt = 0;
  };
  std::vector<std::vector<Cell>> cells(N, std::vector<Cell>(R * T));
  parallel_for(N, [&](std::size_t lo, std::size_t hi) {
    for (std::size_t n = lo; n < hi; ++n) {
      auto dts = img_dts[n];
      std::stable_sort(dts.begin(), dts.end(),
                       [](const ResultRecord* a, const ResultRecord* b) { return prediction_before(*a, *b); });
      if (dts.size() > opt.max_dets) dts.resize(opt.max_dets);
      const auto& g = img_gts[n];
      std::vector<std::vector<double>> sim(dts.size(), std::vector<double>(g.size(), -1.0));
      for (std::size_t d = 0; d < dts.size(); ++d)
        for (std::size_t k = 0; k < g.size(); ++k)
          if (g[k]->num_labeled() > 0) sim[d][k] = oks(dts[d]->keypoints, *g[k], cfg);
      for (std::size_t ri = 0; ri < R; ++ri) {
        const AreaRange& range = opt.ranges[ri];
        std::vector<bool> ignored(g.size());
        std::size_t num_gt = 0;
        for (std::size_t k = 0; k < g.size(); ++k) {
          ignored[k] = g[k]->iscrowd || g[k]->num_labeled() == 0 || !range.contains(g[k]->area);
          num_gt += !ignored[k];
        }
        for (std::size_t ti = 0; ti < T; ++ti) {
          const double thr = opt.thresholds[ti];
          Cell& cell = cells[n][ri * T + ti];
          cell.num_gt = num_gt;
          std::vector<bool> taken(g.size(), false);
          for (std::size_t d = 0; d < dts.size(); ++d) {
            std::ptrdiff_t best = -1;
            for (int pass = 0; pass < 2 && best < 0; ++pass) {
              const bool want_ignored = pass == 1;
              double best_sim = thr;
              for (std::size_t k = 0; k < g.size(); ++k) {
                if (taken[k] || ignored[k] != want_ignored || sim[d][k] < best_sim) continue;
                if (best >= 0 && sim[d][k] == best_sim) continue;
                best = std::ptrdiff_t(k);
                best_sim = sim[d][k];
              }
            }
            if (best >= 0) {
              taken[std::size_t(best)] = true;
              if (!ignored[std::size_t(best)]) cell.dets.emplace_back(dts[d]->score, true);
            } else if (range.contains(dts[d]->keypoint_extent_area())) {
              cell.dets.emplace_back(dts[d]->score, false);
            }
          }
        }
      }
    }
  });

  APReport rep;
  rep.images = N;
  rep.ground_truths = gts.annotations.size();
  rep.predictions = results.size();
  for (std::size_t ri = 0; ri < R; ++ri) {
    RangeResult rr;
    rr.range = opt.ranges[ri];
    double sum = 0.0;
    for (std::size_t ti = 0; ti < T; ++ti) {
      std::vector<std::pair<double, bool>> dets;
      std::size_t num_gt = 0;
      for (std::size_t n = 0; n < N; ++n) {
        const Cell& c = cells[n][ri * T + ti];
        dets.insert(dets.end(), c.dets.begin(), c.dets.end());
        num_gt += c.num_gt;
      }
      rr.num_gt = num_gt;
      rr.thresholds.push_back(integrate_precision(std::move(dets), num_gt, opt.thresholds[ti]));
      sum += rr.thresholds.back().ap;
    }
    rr.mean_ap = T ? sum / double(T) : std::numeric_limits<double>::quiet_NaN();
    rep.ranges.push_back(std::move(rr));
  }

  auto at_threshold = [&](const RangeResult& rr, double t) {
    for (const auto& tr : rr.thresholds)
      if (std::abs(tr.threshold - t) < 1e-9) return tr.ap;
    return std::numeric_limits<double>::quiet_NaN();
  };
  auto range_named = [&](const std::string& name) -> const RangeResult* {
    for (const auto& rr : rep.ranges)
      if (rr.range.name == name) return &rr;
    return nullptr;
  };
  const double nan = std::numeric_limits<double>::quiet_NaN();
  if (const auto* all = range_named("all")) {
    rep.ap = all->mean_ap;
    rep.ap50 = at_threshold(*all, 0.5);
    rep.ap75 = at_threshold(*all, 0.75);
  } else {
    rep.ap = rep.ap50 = rep.ap75 = nan;
  }
  const auto* med = range_named("medium");
  const auto* large = range_named("large");
  rep.ap_m = med ? med->mean_ap : nan;
  rep.ap_l = large ? large->mean_ap : nan;
  return rep;
}

namespace detail {
inline nlohmann::json metric(double v) { return std::isnan(v) ? nlohmann::json(nullptr) : nlohmann::json(v); }
}  // namespace detail

// Undefined metrics (no ground truth in range) are written as null.
inline nlohmann::json to_json(const APReport& r, bool with_curves = false) {
  nlohmann::json j{{"AP", detail::metric(r.ap)},     {"AP50", detail::metric(r.ap50)},
                   {"AP75", detail::metric(r.ap75)}, {"AP_M", detail::metric(r.ap_m)},
                   {"AP_L", detail::metric(r.ap_l)}, {"images", r.images},
                   {"ground_truths", r.ground_truths}, {"predictions", r.predictions}};
  nlohmann::json ranges = nlohmann::json::array();
  for (const auto& rr : r.ranges) {
    nlohmann::json per = nlohmann::json::array();
    for (const auto& t : rr.thresholds) {
      nlohmann::json e{{"threshold", t.threshold},
                       {"ap", detail::metric(t.ap)},
                       {"max_recall", t.max_recall},
                       {"true_positives", t.true_positives},
                       {"false_positives", t.false_positives}};
      if (with_curves) e["precision"] = t.precision;
      per.push_back(std::move(e));
    }
    ranges.push_back({{"range", rr.range.name},
                      {"num_gt", rr.num_gt},
                      {"mean_ap", detail::metric(rr.mean_ap)},
                      {"per_threshold", std::move(per)}});
  }
  j["ranges"] = std::move(ranges);
  return j;
}

inline std::string to_csv(const APReport& r) {
  auto f = [](double v) {
    if (std::isnan(v)) return std::string();
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6f", v);
    return std::string(buf);
  };
  return "AP,AP50,AP75,AP_M,AP_L\n" + f(r.ap) + "," + f(r.ap50) + "," + f(r.ap75) + "," +
         f(r.ap_m) + "," + f(r.ap_l) + "\n";
}

}  // namespace posekit::eval
