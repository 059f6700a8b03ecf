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

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

#include "posekit/config/kv_config.hpp"
#include "posekit/config/settings.hpp"

namespace fs = std::filesystem;
using posekit::ConfigError;
using posekit::config::KvConfig;

namespace {

fs::path temp_dir(const std::string& name) {
  const fs::path d = fs::temp_directory_path() / ("posekit_cfg_" + name);
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

void write(const fs::path& p, const std::string& text) { std::ofstream(p) << text; }

fs::path copy_shipped(const std::string& name) {
  const fs::path d = temp_dir(name);
  for (const auto& e : fs::directory_iterator(POSEKIT_DEFAULT_CONFIG_DIR)) {
    fs::copy_file(e.path(), d / e.path().filename());
  }
  return d;
}

struct EnvGuard {
  explicit EnvGuard(const std::string& v) { setenv(posekit::config::kConfigDirEnv, v.c_str(), 1); }
  ~EnvGuard() { unsetenv(posekit::config::kConfigDirEnv); }
};

}  // namespace

TEST(KvConfig, ParsesKeysCommentsAndLists) {
  const KvConfig c = KvConfig::parse(
      "# header\n\n  alpha = 1.5  \nname=left eye\nlist = 1, 2 ,3\n\t# indented comment\n");
  EXPECT_DOUBLE_EQ(c.number("alpha"), 1.5);
  EXPECT_EQ(c.string("name"), "left eye");
  EXPECT_EQ(c.numbers("list"), (std::vector<double>{1, 2, 3}));
  EXPECT_FALSE(c.has("missing"));
  EXPECT_DOUBLE_EQ(c.number_or("missing", 7.0), 7.0);
  EXPECT_EQ(c.values().size(), 3u);
}

TEST(KvConfig, RejectsMalformedInput) {
  EXPECT_THROW(KvConfig::parse("no equals sign\n"), ConfigError);
  EXPECT_THROW(KvConfig::parse(" = 3\n"), ConfigError);
  EXPECT_THROW(KvConfig::parse("a = 1\na = 2\n"), ConfigError);
  EXPECT_THROW(KvConfig::parse("bad key = 1\n"), ConfigError);
  const KvConfig c = KvConfig::parse("x = 1.5abc\ny = 1,,2\nz =\n");
  EXPECT_THROW(c.number("x"), ConfigError);
  EXPECT_THROW(c.numbers("y"), ConfigError);
  EXPECT_THROW(c.number("z"), ConfigError);
  EXPECT_THROW(c.string("w"), ConfigError);
}

TEST(KvConfig, ErrorsNameFileAndLine) {
  try {
    KvConfig::parse("a = 1\n\nbroken\n", "x.conf");
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("x.conf:3"), std::string::npos) << e.what();
  }
  EXPECT_THROW(KvConfig::load("/nonexistent/file.conf"), ConfigError);
}

TEST(Settings, ShippedFilesMatchBuiltins) {
  const auto shipped = posekit::config::load_settings(POSEKIT_DEFAULT_CONFIG_DIR);
  const auto builtin = posekit::config::builtin_settings();
  EXPECT_EQ(shipped.keypoint_names, builtin.keypoint_names);
  EXPECT_EQ(shipped.flip_pairs, builtin.flip_pairs);
  ASSERT_EQ(shipped.oks.falloff.size(), builtin.oks.falloff.size());
  for (std::size_t i = 0; i < builtin.oks.falloff.size(); ++i) {
    EXPECT_DOUBLE_EQ(shipped.oks.falloff[i], builtin.oks.falloff[i]) << i;
  }
  EXPECT_DOUBLE_EQ(shipped.pckh.head_factor, 0.6);
  EXPECT_EQ(shipped.pckh.fractions, (std::vector<double>{0.5, 0.1}));
  EXPECT_EQ(shipped.preprocess.mean, builtin.preprocess.mean);
  EXPECT_EQ(shipped.preprocess.std, builtin.preprocess.std);
  EXPECT_DOUBLE_EQ(shipped.preprocess.expansion, 1.25);
  EXPECT_TRUE(shipped.preprocess.pad_to_aspect);
}

TEST(Settings, EnvironmentOverridesDirectory) {
  const fs::path d = copy_shipped("env");
  write(d / "pckh.conf", "head_factor = 0.5\nfractions = 0.2\n");
  write(d / "preprocess.conf", "mean = 0.5, 0.5, 0.5\nstd = 0.25, 0.25, 0.25\naspect = stretch\n");
  EnvGuard guard(d.string());
  EXPECT_EQ(posekit::config::config_dir(), d);
  const auto s = posekit::config::resolve_settings();
  EXPECT_EQ(s.source, d.string());
  EXPECT_DOUBLE_EQ(s.pckh.head_factor, 0.5);
  EXPECT_EQ(s.pckh.fractions, std::vector<double>{0.2});
  EXPECT_DOUBLE_EQ(s.preprocess.mean[1], 0.5);
  EXPECT_FALSE(s.preprocess.pad_to_aspect);
  EXPECT_DOUBLE_EQ(s.preprocess.expansion, 1.25);
}

TEST(Settings, MissingOverrideDirectoryIsAnError) {
  EnvGuard guard("/nonexistent/posekit-config");
  EXPECT_THROW(posekit::config::resolve_settings(), ConfigError);
}

TEST(Settings, FlipPairsResolveByName) {
  const fs::path d = copy_shipped("pairs");
  write(d / "keypoints.conf", "names = a, b, c\nflip_pairs = c:a\n");
  write(d / "oks.conf", "falloff = 0.1, 0.1, 0.1\n");
  const auto s = posekit::config::load_settings(d);
  ASSERT_EQ(s.flip_pairs.size(), 1u);
  EXPECT_EQ(s.flip_pairs[0], (std::pair<std::size_t, std::size_t>{2, 0}));

  write(d / "keypoints.conf", "names = a, b, c\nflip_pairs =\n");
  EXPECT_TRUE(posekit::config::load_settings(d).flip_pairs.empty());
}

TEST(Settings, InconsistentFilesAreRejected) {
  const fs::path d = copy_shipped("bad");
  const auto expect_bad = [&](const std::string& file, const std::string& text) {
    const fs::path p = d / file;
    std::ifstream in(p);
    const std::string saved((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    write(p, text);
    EXPECT_THROW(posekit::config::load_settings(d), ConfigError) << file << ": " << text;
    write(p, saved);
  };
  expect_bad("keypoints.conf", "names = a, a\n");
  expect_bad("keypoints.conf",
             std::string("names = nose, left_eye, right_eye, left_ear, right_ear, left_shoulder, "
                         "right_shoulder, left_elbow, right_elbow, left_wrist, right_wrist, "
                         "left_hip, right_hip, left_knee, right_knee, left_ankle, right_ankle\n") +
                 "flip_pairs = left_eye:nowhere\n");
  expect_bad("keypoints.conf",
             std::string("names = nose, left_eye, right_eye, left_ear, right_ear, left_shoulder, "
                         "right_shoulder, left_elbow, right_elbow, left_wrist, right_wrist, "
                         "left_hip, right_hip, left_knee, right_knee, left_ankle, right_ankle\n") +
                 "flip_pairs = left_eye:right_eye, left_eye:left_ear\n");
  expect_bad("oks.conf", "falloff = 0.1, 0.2\n");
  expect_bad("oks.conf", "falloff = 0.052, 0.050, 0.050, 0.070, 0.070, 0.158, 0.158, 0.144, "
                         "0.144, 0.124, 0.124, 0.214, 0.214, 0.174, 0.174, 0.178, 0\n");
  expect_bad("pckh.conf", "head_factor = -1\n");
  expect_bad("preprocess.conf", "mean = 0.5, 0.5\nstd = 0.2, 0.2, 0.2\n");
  expect_bad("preprocess.conf", "mean = 0.5, 0.5, 0.5\nstd = 0.2, 0, 0.2\n");
  expect_bad("preprocess.conf", "mean = 0.5, 0.5, 0.5\nstd = 0.2, 0.2, 0.2\naspect = crop\n");
  fs::remove(d / "oks.conf");
  EXPECT_THROW(posekit::config::load_settings(d), ConfigError);
}
