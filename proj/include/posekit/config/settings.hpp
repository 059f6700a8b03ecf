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

// Runtime settings loaded from a config directory:
//   keypoints.conf   names, flip_pairs (left:right by name)
//   oks.conf         falloff (one OKS constant per keypoint)
//   pckh.conf        head_factor, fractions
//   preprocess.conf  mean, std (per RGB channel, [0, 1] units), expansion,
//                    aspect (pad | stretch)
// The directory is $MOVEPOSE_CONFIG_DIR when set, otherwise the build's
// default. Built-in values apply only when the default directory is absent.

#include <cstdlib>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "posekit/config/kv_config.hpp"
#include "posekit/core/error.hpp"
#include "posekit/decode/flip.hpp"
#include "posekit/eval/oks.hpp"
#include "posekit/eval/pckh.hpp"
#include "posekit/pipeline/preprocess.hpp"

#ifndef POSEKIT_DEFAULT_CONFIG_DIR
#define POSEKIT_DEFAULT_CONFIG_DIR "config"
#endif

namespace posekit::config {

inline constexpr const char* kConfigDirEnv = "MOVEPOSE_CONFIG_DIR";

struct Settings {
  std::vector<std::string> keypoint_names;
  decode::FlipPairs flip_pairs;
  eval::OksConfig oks;
  eval::PckhConfig pckh;
  pipeline::PreprocessSpec preprocess;
  std::string source;  // directory the values came from, or "built-in"

  void validate() const {
    oks.validate();
    pckh.validate();
    preprocess.validate();
    if (oks.falloff.size() != keypoint_names.size()) {
      throw ConfigError("OKS constants (" + std::to_string(oks.falloff.size()) +
                        ") do not match keypoint count (" +
                        std::to_string(keypoint_names.size()) + ")");
    }
    decode::flip_permutation(flip_pairs, keypoint_names.size());
  }
};

inline Settings builtin_settings() {
  Settings s;
  s.keypoint_names = {"nose",          "left_eye",       "right_eye",  "left_ear",
                      "right_ear",     "left_shoulder",  "right_shoulder", "left_elbow",
                      "right_elbow",   "left_wrist",     "right_wrist", "left_hip",
                      "right_hip",     "left_knee",      "right_knee", "left_ankle",
                      "right_ankle"};
  s.flip_pairs = {{1, 2}, {3, 4}, {5, 6}, {7, 8}, {9, 10}, {11, 12}, {13, 14}, {15, 16}};
  s.oks = eval::OksConfig::coco17();
  s.source = "built-in";
  return s;
}

inline Settings load_settings(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) {
    throw ConfigError("config directory '" + dir.string() + "' does not exist");
  }
  Settings s;
  s.source = dir.string();

  const KvConfig kp = KvConfig::load(dir / "keypoints.conf");
  s.keypoint_names = kp.list("names");
  std::map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < s.keypoint_names.size(); ++i) {
    if (!index.emplace(s.keypoint_names[i], i).second) {
      throw ConfigError(kp.source() + ": duplicate keypoint name '" + s.keypoint_names[i] + "'");
    }
  }
  if (kp.has("flip_pairs") && !kp.string("flip_pairs").empty()) {
    for (const auto& pair : kp.list("flip_pairs")) {
      const auto colon = pair.find(':');
      if (colon == std::string::npos) {
        throw ConfigError(kp.source() + ": flip pair '" + pair + "' must be left:right");
      }
      const auto a = index.find(detail::trim(pair.substr(0, colon)));
      const auto b = index.find(detail::trim(pair.substr(colon + 1)));
      if (a == index.end() || b == index.end()) {
        throw ConfigError(kp.source() + ": flip pair '" + pair + "' names an unknown keypoint");
      }
      s.flip_pairs.emplace_back(a->second, b->second);
    }
  }

  const KvConfig oks = KvConfig::load(dir / "oks.conf");
  s.oks.falloff = oks.numbers("falloff");

  const KvConfig pck = KvConfig::load(dir / "pckh.conf");
  s.pckh.head_factor = pck.number("head_factor");
  if (pck.has("fractions")) s.pckh.fractions = pck.numbers("fractions");

  const KvConfig pre = KvConfig::load(dir / "preprocess.conf");
  const auto mean = pre.numbers("mean"), sd = pre.numbers("std");
  if (mean.size() != 3 || sd.size() != 3) {
    throw ConfigError(pre.source() + ": mean and std need exactly 3 values");
  }
  for (int c = 0; c < 3; ++c) {
    s.preprocess.mean[c] = mean[c];
    s.preprocess.std[c] = sd[c];
  }
  s.preprocess.expansion = pre.number_or("expansion", 1.25);
  if (pre.has("aspect")) {
    const std::string& a = pre.string("aspect");
    if (a != "pad" && a != "stretch") {
      throw ConfigError(pre.source() + ": aspect must be 'pad' or 'stretch', got '" + a + "'");
    }
    s.preprocess.pad_to_aspect = a == "pad";
  }
  s.validate();
  return s;
}

inline std::filesystem::path config_dir() {
  if (const char* env = std::getenv(kConfigDirEnv); env && *env) return env;
  return POSEKIT_DEFAULT_CONFIG_DIR;
}

inline Settings resolve_settings() {
  if (const char* env = std::getenv(kConfigDirEnv); env && *env) return load_settings(env);
  const std::filesystem::path def = POSEKIT_DEFAULT_CONFIG_DIR;
  if (std::filesystem::is_directory(def)) return load_settings(def);
  Settings s = builtin_settings();
  s.validate();
  return s;
}

}  // namespace posekit::config
