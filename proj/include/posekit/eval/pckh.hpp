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

// PCKh: a labeled keypoint is correct when its distance to the ground truth
// is at most fraction * reference, where reference = factor * diagonal of
// the annotation's head box. Predictions pair with annotations by
// annotation_id when given, otherwise by order within each image.
// Annotations without a head box are skipped and counted; annotations with
// no paired prediction count all their labeled keypoints as misses.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "posekit/core/error.hpp"
#include "posekit/eval/annotation.hpp"

namespace posekit::eval {

struct PckhConfig {
  double head_factor = 0.6;
  std::vector<double> fractions{0.5, 0.1};

  void validate() const {
    if (!(head_factor > 0.0)) throw ConfigError("PCKh head factor must be positive");
    for (double f : fractions) {
      if (!(f >= 0.0)) throw ConfigError("PCKh fractions must be non-negative");
    }
  }
};

struct PckhReport {
  std::vector<double> fractions;
  std::vector<double> accuracy;  // per fraction, over labeled keypoints
  std::size_t evaluated_keypoints = 0;
  std::size_t evaluated_records = 0;
  std::size_t skipped_no_head_box = 0;
  std::size_t unpaired_records = 0;

  // Accuracy at a given fraction, NaN when it was not evaluated.
  double at(double fraction) const {
    for (std::size_t i = 0; i < fractions.size(); ++i)
      if (fractions[i] == fraction) return accuracy[i];
    return std::nan("");
  }
  double mean() const { return at(0.5); }
  double mean_at_01() const { return at(0.1); }
};

inline double head_reference(const std::array<double, 4>& hb, double factor) {
  return factor * std::hypot(hb[2] - hb[0], hb[3] - hb[1]);
}

inline PckhReport pckh(const std::vector<ResultRecord>& preds, const AnnotationSet& gts,
                       const PckhConfig& cfg = {}) {
  cfg.validate();
  std::map<std::int64_t, const ResultRecord*> by_ann;
  std::map<std::int64_t, std::vector<const ResultRecord*>> by_image;
  for (const auto& p : preds) {
    if (p.annotation_id) {
      if (!by_ann.emplace(*p.annotation_id, &p).second) {
        throw IngestionError("two predictions claim annotation " + std::to_string(*p.annotation_id));
      }
    } else {
      by_image[p.image_id].push_back(&p);
    }
  }
  std::map<std::int64_t, std::size_t> next_in_image;

  PckhReport rep;
  rep.fractions = cfg.fractions;
  std::vector<std::size_t> hits(cfg.fractions.size(), 0);
  for (const auto& a : gts.annotations) {
    const ResultRecord* p = nullptr;
    if (auto it = by_ann.find(a.id); it != by_ann.end()) {
      p = it->second;
      by_ann.erase(it);
    } else if (auto im = by_image.find(a.image_id); im != by_image.end()) {
      std::size_t& k = next_in_image[a.image_id];
      if (k < im->second.size()) p = im->second[k++];
    }
    if (!a.head_box) {
      ++rep.skipped_no_head_box;
      continue;
    }
    const std::size_t labeled = a.num_labeled();
    if (labeled == 0) continue;
    ++rep.evaluated_records;
    rep.evaluated_keypoints += labeled;
    if (!p) {
      ++rep.unpaired_records;
      continue;
    }
    if (p->keypoints.size() != a.keypoints.size()) {
      throw IngestionError("prediction for annotation " + std::to_string(a.id) + " has " +
                           std::to_string(p->keypoints.size()) + " keypoints, expected " +
                           std::to_string(a.keypoints.size()));
    }
    const double ref = head_reference(*a.head_box, cfg.head_factor);
    for (std::size_t i = 0; i < a.keypoints.size(); ++i) {
      if (a.keypoints[i].v <= 0) continue;
      const double d = std::hypot(p->keypoints[i].x - a.keypoints[i].x,
                                  p->keypoints[i].y - a.keypoints[i].y);
      for (std::size_t f = 0; f < cfg.fractions.size(); ++f) hits[f] += d <= cfg.fractions[f] * ref;
    }
  }
  if (!by_ann.empty()) {
    throw IngestionError("prediction references unknown annotation " +
                         std::to_string(by_ann.begin()->first));
  }
  for (std::size_t f = 0; f < cfg.fractions.size(); ++f) {
    rep.accuracy.push_back(rep.evaluated_keypoints
                               ? double(hits[f]) / double(rep.evaluated_keypoints)
                               : std::nan(""));
  }
  return rep;
}

inline nlohmann::json to_json(const PckhReport& r) {
  auto m = [](double v) { return std::isnan(v) ? nlohmann::json(nullptr) : nlohmann::json(v); };
  nlohmann::json per = nlohmann::json::object();
  for (std::size_t i = 0; i < r.fractions.size(); ++i) {
    char key[32];
    std::snprintf(key, sizeof key, "%g", r.fractions[i]);
    per[key] = m(r.accuracy[i]);
  }
  return {{"Mean", m(r.mean())},
          {"Mean@0.1", m(r.mean_at_01())},
          {"per_fraction", per},
          {"evaluated_keypoints", r.evaluated_keypoints},
          {"evaluated_records", r.evaluated_records},
          {"skipped_no_head_box", r.skipped_no_head_box},
          {"unpaired_records", r.unpaired_records}};
}

inline std::string to_csv(const PckhReport& r) {
  auto f = [](double v) {
    if (std::isnan(v)) return std::string();
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6f", v);
    return std::string(buf);
  };
  return "Mean,Mean@0.1\n" + f(r.mean()) + "," + f(r.mean_at_01()) + "\n";
}

}  // namespace posekit::eval
