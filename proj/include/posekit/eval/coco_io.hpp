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

// COCO keypoint JSON: annotation files (images / annotations / categories)
// and results arrays of {image_id, category_id, keypoints, score}.
// Annotations may carry an extra "head_box": [x1, y1, x2, y2] for PCKh;
// results may carry "annotation_id" to pair with a specific person.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "posekit/core/error.hpp"
#include "posekit/eval/annotation.hpp"

namespace posekit::eval {

namespace detail {

using nlohmann::json;

[[noreturn]] inline void parse_fail(const std::string& where, std::size_t index,
                                    const std::string& what) {
  throw ParseError(where + "[" + std::to_string(index) + "]: " + what);
}

inline const json& field(const json& rec, const char* key, const std::string& where,
                         std::size_t index) {
  if (!rec.is_object()) parse_fail(where, index, "record is not an object");
  auto it = rec.find(key);
  if (it == rec.end()) parse_fail(where, index, std::string("missing field \"") + key + "\"");
  return *it;
}

inline double number(const json& v, const char* key, const std::string& where, std::size_t index) {
  if (!v.is_number()) parse_fail(where, index, std::string("\"") + key + "\" is not a number");
  return v.get<double>();
}

inline std::int64_t integer(const json& v, const char* key, const std::string& where,
                            std::size_t index) {
  if (!v.is_number_integer()) {
    parse_fail(where, index, std::string("\"") + key + "\" is not an integer");
  }
  return v.get<std::int64_t>();
}

inline std::vector<double> flat_triplets(const json& v, std::size_t keypoints,
                                         const std::string& where, std::size_t index) {
  if (!v.is_array()) parse_fail(where, index, "\"keypoints\" is not an array");
  if (v.size() != 3 * keypoints) {
    parse_fail(where, index, "\"keypoints\" has " + std::to_string(v.size()) +
                                 " values, expected " + std::to_string(3 * keypoints));
  }
  std::vector<double> out;
  out.reserve(v.size());
  for (const auto& e : v) out.push_back(number(e, "keypoints", where, index));
  return out;
}

inline json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open '" + path.string() + "'");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ParseError("'" + path.string() + "' is not valid JSON: " + e.what());
  }
}

}  // namespace detail

inline AnnotationSet parse_coco_annotations(const nlohmann::json& j, std::size_t keypoints = 17) {
  using namespace detail;
  if (!j.is_object()) throw ParseError("annotation file root is not an object");
  AnnotationSet set;
  if (auto it = j.find("categories"); it != j.end() && it->is_array() && !it->empty()) {
    const json& cat = (*it)[0];
    if (auto kn = cat.find("keypoints"); kn != cat.end() && kn->is_array()) {
      for (const auto& n : *kn) set.keypoint_names.push_back(n.is_string() ? n.get<std::string>() : "");
      keypoints = set.keypoint_names.size();
    }
    if (auto sk = cat.find("skeleton"); sk != cat.end() && sk->is_array()) {
      for (const auto& e : *sk) {
        if (e.is_array() && e.size() == 2 && e[0].is_number_integer() && e[1].is_number_integer()) {
          set.skeleton.push_back({e[0].get<std::size_t>(), e[1].get<std::size_t>()});
        }
      }
    }
  }
  if (auto it = j.find("images"); it != j.end()) {
    if (!it->is_array()) throw ParseError("\"images\" is not an array");
    for (std::size_t i = 0; i < it->size(); ++i) {
      const json& r = (*it)[i];
      ImageInfo info;
      info.id = integer(field(r, "id", "images", i), "id", "images", i);
      if (auto w = r.find("width"); w != r.end()) info.width = integer(*w, "width", "images", i);
      if (auto h = r.find("height"); h != r.end()) info.height = integer(*h, "height", "images", i);
      if (auto f = r.find("file_name"); f != r.end() && f->is_string()) info.file_name = *f;
      set.images.push_back(std::move(info));
    }
  }
  const json& anns = j.contains("annotations") ? j["annotations"] : json::array();
  if (!anns.is_array()) throw ParseError("\"annotations\" is not an array");
  for (std::size_t i = 0; i < anns.size(); ++i) {
    const json& r = anns[i];
    const std::string where = "annotations";
    Annotation a;
    a.id = r.contains("id") ? integer(r["id"], "id", where, i) : std::int64_t(i);
    a.image_id = integer(field(r, "image_id", where, i), "image_id", where, i);
    if (r.contains("category_id")) a.category_id = integer(r["category_id"], "category_id", where, i);
    const auto flat = flat_triplets(field(r, "keypoints", where, i), keypoints, where, i);
    for (std::size_t k = 0; k < keypoints; ++k) {
      const double v = flat[3 * k + 2];
      if (v != 0.0 && v != 1.0 && v != 2.0) {
        parse_fail(where, i, "keypoint " + std::to_string(k) + " has visibility " +
                                 std::to_string(v) + "; expected 0, 1 or 2");
      }
      a.keypoints.push_back({flat[3 * k], flat[3 * k + 1], int(v)});
    }
    a.area = r.contains("area") ? number(r["area"], "area", where, i) : 0.0;
    if (a.num_labeled() > 0 && !(a.area > 0.0)) {
      parse_fail(where, i, "labeled keypoints require a positive \"area\"");
    }
    if (auto b = r.find("bbox"); b != r.end()) {
      if (!b->is_array() || b->size() != 4) parse_fail(where, i, "\"bbox\" must have 4 numbers");
      for (std::size_t q = 0; q < 4; ++q) a.bbox[q] = number((*b)[q], "bbox", where, i);
    }
    if (auto c = r.find("iscrowd"); c != r.end()) a.iscrowd = c->is_boolean() ? c->get<bool>() : c->get<int>() != 0;
    if (auto h = r.find("head_box"); h != r.end() && !h->is_null()) {
      if (!h->is_array() || h->size() != 4) parse_fail(where, i, "\"head_box\" must have 4 numbers");
      std::array<double, 4> hb{};
      for (std::size_t q = 0; q < 4; ++q) hb[q] = number((*h)[q], "head_box", where, i);
      a.head_box = hb;
    }
    set.annotations.push_back(std::move(a));
  }
  return set;
}

inline AnnotationSet load_coco_annotations(const std::filesystem::path& path,
                                           std::size_t keypoints = 17) {
  try {
    return parse_coco_annotations(detail::read_json_file(path), keypoints);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError("'" + path.string() + "': " + e.what());
  }
}

inline std::vector<ResultRecord> parse_results(const nlohmann::json& j, std::size_t keypoints = 17) {
  using namespace detail;
  if (!j.is_array()) throw ParseError("results file root is not an array");
  std::vector<ResultRecord> out;
  for (std::size_t i = 0; i < j.size(); ++i) {
    const json& r = j[i];
    const std::string where = "results";
    ResultRecord rec;
    rec.image_id = integer(field(r, "image_id", where, i), "image_id", where, i);
    if (r.contains("category_id")) rec.category_id = integer(r["category_id"], "category_id", where, i);
    const auto flat = flat_triplets(field(r, "keypoints", where, i), keypoints, where, i);
    for (std::size_t k = 0; k < keypoints; ++k) {
      rec.keypoints.push_back({flat[3 * k], flat[3 * k + 1], flat[3 * k + 2]});
    }
    rec.score = number(field(r, "score", where, i), "score", where, i);
    if (auto a = r.find("annotation_id"); a != r.end() && !a->is_null()) {
      rec.annotation_id = integer(*a, "annotation_id", where, i);
    }
    out.push_back(std::move(rec));
  }
  return out;
}

inline std::vector<ResultRecord> load_results(const std::filesystem::path& path,
                                              std::size_t keypoints = 17) {
  try {
    return parse_results(detail::read_json_file(path), keypoints);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError("'" + path.string() + "': " + e.what());
  }
}

inline nlohmann::json results_to_json(const std::vector<ResultRecord>& results) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& r : results) {
    nlohmann::json kps = nlohmann::json::array();
    for (const auto& k : r.keypoints) {
      kps.push_back(k.x);
      kps.push_back(k.y);
      kps.push_back(k.score);
    }
    nlohmann::json rec{{"image_id", r.image_id},
                       {"category_id", r.category_id},
                       {"keypoints", std::move(kps)},
                       {"score", r.score}};
    if (r.annotation_id) rec["annotation_id"] = *r.annotation_id;
    arr.push_back(std::move(rec));
  }
  return arr;
}

inline void write_results(const std::filesystem::path& path, const std::vector<ResultRecord>& results) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw InputError("cannot write '" + path.string() + "'");
  out << results_to_json(results).dump(2) << '\n';
  if (!out) throw InputError("short write to '" + path.string() + "'");
}

}  // namespace posekit::eval
