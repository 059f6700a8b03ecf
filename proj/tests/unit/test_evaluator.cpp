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

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <random>

#include "oracles/coco_oracle.hpp"
#include "posekit/eval/coco_eval.hpp"
#include "posekit/eval/coco_io.hpp"
#include "posekit/eval/oks.hpp"
#include "posekit/eval/pckh.hpp"

using namespace posekit;
using namespace posekit::eval;

namespace {

const std::filesystem::path kData = POSEKIT_TEST_DATA;
constexpr double kInf = std::numeric_limits<double>::infinity();

Annotation make_gt(std::mt19937& rng, std::size_t K, double area) {
  std::uniform_real_distribution<double> pos(0, 500);
  Annotation a;
  a.area = area;
  for (std::size_t i = 0; i < K; ++i) a.keypoints.push_back({pos(rng), pos(rng), int(rng() % 3)});
  if (a.num_labeled() == 0) a.keypoints[0].v = 2;
  return a;
}

ResultRecord as_result(const Annotation& a, double score) {
  ResultRecord r;
  r.image_id = a.image_id;
  r.score = score;
  for (const auto& k : a.keypoints) r.keypoints.push_back({k.x, k.y, 1.0});
  return r;
}

ResultRecord perturbed(const Annotation& a, double sigma, double score, std::mt19937& rng) {
  std::normal_distribution<double> n(0, sigma);
  ResultRecord r = as_result(a, score);
  for (auto& k : r.keypoints) {
    k.x += n(rng);
    k.y += n(rng);
  }
  return r;
}

std::vector<oracle::Range> oracle_ranges() {
  return {{-kInf, kInf}, {32.0 * 32.0, 96.0 * 96.0}, {96.0 * 96.0, kInf}};
}

void expect_matches_oracle(const std::vector<ResultRecord>& preds, const AnnotationSet& gts,
                           const OksConfig& cfg) {
  const CocoEvalOptions opt;
  const APReport rep = evaluate_coco(preds, gts, cfg, opt);
  const auto ref = oracle::brute_force_ap(preds, gts, cfg.falloff, oracle_ranges(), opt.thresholds,
                                          opt.max_dets);
  for (std::size_t r = 0; r < 3; ++r) {
    for (std::size_t t = 0; t < opt.thresholds.size(); ++t) {
      const double got = rep.ranges[r].thresholds[t].ap, want = ref[r][t];
      if (std::isnan(want)) {
        EXPECT_TRUE(std::isnan(got)) << "range " << r << " threshold " << t;
      } else {
        EXPECT_EQ(got, want) << "range " << r << " threshold " << opt.thresholds[t];
      }
    }
  }
}

// Random image set with duplicates, misses, false positives, tied scores
// and a spread of areas.
std::pair<std::vector<ResultRecord>, AnnotationSet> random_fixture(std::mt19937& rng, std::size_t K) {
  AnnotationSet gts;
  std::vector<ResultRecord> preds;
  std::uniform_real_distribution<double> area(300, 20000);
  const std::size_t images = 2 + rng() % 4;
  std::int64_t next = 1;
  for (std::size_t im = 0; im < images; ++im) {
    gts.images.push_back({std::int64_t(im + 1), 640, 480, ""});
    const std::size_t persons = rng() % 4;
    for (std::size_t p = 0; p < persons; ++p) {
      Annotation a = make_gt(rng, K, area(rng));
      a.id = next++;
      a.image_id = std::int64_t(im + 1);
      if (rng() % 8 == 0) {
        for (auto& k : a.keypoints) k.v = 0;
      }
      gts.annotations.push_back(a);
      const int copies = int(rng() % 3);
      for (int c = 0; c < copies; ++c) {
        const double sigma = std::sqrt(a.area) * 0.02 * double(1 + rng() % 6);
        preds.push_back(perturbed(a, sigma, double(rng() % 10) / 10.0, rng));
      }
    }
    if (rng() % 2) {
      Annotation fake = make_gt(rng, K, 1000);
      fake.image_id = std::int64_t(im + 1);
      preds.push_back(as_result(fake, double(rng() % 10) / 10.0));
    }
  }
  return {preds, gts};
}

}  // namespace

TEST(Oks, HandCases) {
  const OksConfig cfg{{0.1, 0.2}};
  Annotation gt;
  gt.area = 400.0;
  gt.keypoints = {{10, 10, 2}, {20, 20, 1}};
  std::vector<decode::Keypoint> exact{{10, 10, 1}, {20, 20, 1}};
  EXPECT_EQ(oks(exact, gt, cfg), 1.0);

  Annotation one;
  one.area = 400.0;
  one.keypoints = {{0, 0, 2}, {0, 0, 0}};
  const double d = std::sqrt(one.area) * 0.1 * std::sqrt(2.0);
  std::vector<decode::Keypoint> far{{d, 0, 1}, {1e6, 1e6, 1}};
  EXPECT_NEAR(oks(far, one, cfg), 0.36788, 1e-5);
  EXPECT_NEAR(oks(far, one, cfg), std::exp(-1.0), 1e-15);

  std::vector<decode::Keypoint> unlabeled_far{{0, 0, 1}, {1e9, -1e9, 1}};
  EXPECT_EQ(oks(unlabeled_far, one, cfg), 1.0);

  Annotation none;
  none.area = 10;
  none.keypoints = {{1, 1, 0}, {2, 2, 0}};
  try {
    oks(exact, none, cfg);
    FAIL();
  } catch (const NoLabeledKeypoints& e) {
    EXPECT_EQ(e.category(), "no-labeled-keypoints");
  }
  EXPECT_THROW(oks(std::vector<decode::Keypoint>{{0, 0, 1}}, gt, cfg), DimensionError);
  EXPECT_THROW((OksConfig{{0.1, 0.0}}.validate()), ConfigError);
}

TEST(Oks, MatchesDirectFormula) {
  std::mt19937 rng(1);
  std::uniform_real_distribution<double> j(0.01, 0.3), area(10, 1e5), noise(-40, 40);
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t K = 1 + rng() % 17;
    OksConfig cfg;
    for (std::size_t i = 0; i < K; ++i) cfg.falloff.push_back(j(rng));
    Annotation gt = make_gt(rng, K, area(rng));
    ResultRecord p = as_result(gt, 1.0);
    for (auto& k : p.keypoints) {
      k.x += noise(rng);
      k.y += noise(rng);
    }
    const double got = oks(p.keypoints, gt, cfg);
    EXPECT_NEAR(got, oracle::oks_formula(p, gt, cfg.falloff), 1e-12);
    EXPECT_GE(got, 0.0);
    EXPECT_LE(got, 1.0);
  }
}

TEST(Oks, ScaleInvariance) {
  std::mt19937 rng(2);
  std::uniform_real_distribution<double> scale(0.1, 10), noise(-30, 30);
  const OksConfig cfg = OksConfig::coco17();
  for (int trial = 0; trial < 500; ++trial) {
    Annotation gt = make_gt(rng, 17, 2000 + rng() % 5000);
    ResultRecord p = as_result(gt, 1.0);
    for (auto& k : p.keypoints) {
      k.x += noise(rng);
      k.y += noise(rng);
    }
    const double c = scale(rng);
    Annotation gs = gt;
    gs.area *= c * c;
    for (auto& k : gs.keypoints) {
      k.x *= c;
      k.y *= c;
    }
    ResultRecord ps = p;
    for (auto& k : ps.keypoints) {
      k.x *= c;
      k.y *= c;
    }
    EXPECT_NEAR(oks(ps.keypoints, gs, cfg), oks(p.keypoints, gt, cfg), 1e-9);
  }
}

TEST(Oks, MonotoneInDistance) {
  std::mt19937 rng(3);
  const OksConfig cfg = OksConfig::coco17();
  for (int trial = 0; trial < 300; ++trial) {
    Annotation gt = make_gt(rng, 17, 5000);
    ResultRecord p = as_result(gt, 1.0);
    const std::size_t i = rng() % 17;
    double prev = oks(p.keypoints, gt, cfg);
    for (int step = 1; step < 20; ++step) {
      p.keypoints[i].x += 1.5;
      const double cur = oks(p.keypoints, gt, cfg);
      EXPECT_LE(cur, prev);
      prev = cur;
    }
  }
}

TEST(CocoEval, PerfectAndEmptyPredictions) {
  const AnnotationSet gts = load_coco_annotations(kData / "coco_toy_gt.json");
  const auto perfect = load_results(kData / "coco_toy_gt_as_results.json");
  const APReport rep = evaluate_coco(perfect, gts, OksConfig::coco17());
  EXPECT_EQ(rep.ap, 1.0);
  EXPECT_EQ(rep.ap50, 1.0);
  EXPECT_EQ(rep.ap75, 1.0);
  EXPECT_EQ(rep.ap_m, 1.0);
  EXPECT_EQ(rep.ap_l, 1.0);

  const APReport none = evaluate_coco({}, gts, OksConfig::coco17());
  EXPECT_EQ(none.ap, 0.0);
  EXPECT_EQ(none.ap50, 0.0);
}

TEST(CocoEval, UnknownImageIsIngestionError) {
  const AnnotationSet gts = load_coco_annotations(kData / "coco_toy_gt.json");
  auto preds = load_results(kData / "coco_toy_results.json");
  preds[0].image_id = 999;
  try {
    evaluate_coco(preds, gts, OksConfig::coco17());
    FAIL();
  } catch (const IngestionError& e) {
    EXPECT_EQ(e.category(), "ingestion-error");
    EXPECT_NE(std::string(e.what()).find("999"), std::string::npos);
  }
}

TEST(CocoEval, ToyFixtureMatchesBruteForce) {
  const AnnotationSet gts = load_coco_annotations(kData / "coco_toy_gt.json");
  ASSERT_EQ(gts.images.size(), 5u);
  ASSERT_EQ(gts.annotations.size(), 10u);
  const auto preds = load_results(kData / "coco_toy_results.json");
  expect_matches_oracle(preds, gts, OksConfig::coco17());
  const APReport rep = evaluate_coco(preds, gts, OksConfig::coco17());
  EXPECT_GT(rep.ap, 0.0);
  EXPECT_LT(rep.ap, 1.0);
}

TEST(CocoEval, RandomFixturesMatchBruteForce) {
  std::mt19937 rng(4);
  OksConfig cfg;
  cfg.falloff = {0.05, 0.08, 0.1, 0.15};
  for (int trial = 0; trial < 60; ++trial) {
    auto [preds, gts] = random_fixture(rng, 4);
    expect_matches_oracle(preds, gts, cfg);
  }
}

TEST(CocoEval, InvariantUnderRelabelingAndPermutation) {
  std::mt19937 rng(5);
  OksConfig cfg;
  cfg.falloff = {0.05, 0.08, 0.1, 0.15};
  for (int trial = 0; trial < 40; ++trial) {
    auto [preds, gts] = random_fixture(rng, 4);
    const APReport base = evaluate_coco(preds, gts, cfg);
    std::map<std::int64_t, std::int64_t> relabel;
    for (auto& im : gts.images) relabel[im.id] = 1000 - 7 * im.id;
    for (auto& im : gts.images) im.id = relabel[im.id];
    for (auto& a : gts.annotations) a.image_id = relabel[a.image_id];
    for (auto& p : preds) p.image_id = relabel[p.image_id];
    std::shuffle(preds.begin(), preds.end(), rng);
    std::shuffle(gts.images.begin(), gts.images.end(), rng);
    const APReport moved = evaluate_coco(preds, gts, cfg);
    for (std::size_t r = 0; r < base.ranges.size(); ++r)
      for (std::size_t t = 0; t < base.ranges[r].thresholds.size(); ++t) {
        const double a = base.ranges[r].thresholds[t].ap, b = moved.ranges[r].thresholds[t].ap;
        EXPECT_TRUE(a == b || (std::isnan(a) && std::isnan(b)));
      }
  }
}

TEST(CocoEval, ReportInvariants) {
  std::mt19937 rng(6);
  OksConfig cfg;
  cfg.falloff = {0.05, 0.08, 0.1, 0.15};
  for (int trial = 0; trial < 40; ++trial) {
    auto [preds, gts] = random_fixture(rng, 4);
    const APReport rep = evaluate_coco(preds, gts, cfg);
    if (std::isnan(rep.ap)) continue;
    double max_t = 0.0;
    for (const auto& t : rep.ranges[0].thresholds) {
      EXPECT_GE(t.ap, 0.0);
      EXPECT_LE(t.ap, 1.0);
      max_t = std::max(max_t, t.ap);
    }
    EXPECT_LE(rep.ap, max_t);
    // Stricter thresholds never help.
    for (std::size_t t = 1; t < rep.ranges[0].thresholds.size(); ++t) {
      EXPECT_LE(rep.ranges[0].thresholds[t].true_positives,
                rep.ranges[0].thresholds[t - 1].true_positives);
    }
  }
}

TEST(CocoEval, MaxDetsTruncatesPerImage) {
  AnnotationSet gts;
  gts.images.push_back({1, 100, 100, ""});
  Annotation a;
  a.id = 1;
  a.image_id = 1;
  a.area = 5000;
  a.keypoints = {{10, 10, 2}};
  gts.annotations.push_back(a);
  OksConfig cfg{{0.1}};
  std::vector<ResultRecord> preds;
  for (int i = 0; i < 25; ++i) {
    ResultRecord r = as_result(a, 0.9 - 0.01 * i);
    r.keypoints[0].x += 200;  // misses
    preds.push_back(r);
  }
  preds.push_back(as_result(a, 0.05));  // the only hit, ranked 26th
  EXPECT_EQ(evaluate_coco(preds, gts, cfg).ap50, 0.0);
  CocoEvalOptions wide;
  wide.max_dets = 100;
  EXPECT_GT(evaluate_coco(preds, gts, cfg, wide).ap50, 0.0);
}

TEST(CocoEval, GoldenReport) {
  const AnnotationSet gts = load_coco_annotations(kData / "coco_toy_gt.json");
  const auto preds = load_results(kData / "coco_toy_results.json");
  const nlohmann::json got = to_json(evaluate_coco(preds, gts, OksConfig::coco17()));
  const auto golden_path = kData / "coco_toy_golden.json";
  if (std::getenv("POSEKIT_REGENERATE_GOLDEN")) {
    // Goldens come from the brute-force matcher, not from the code under test.
    const auto ref = oracle::brute_force_ap(preds, gts, OksConfig::coco17().falloff,
                                            oracle_ranges(), CocoEvalOptions().thresholds, 20);
    auto mean = [](const std::vector<double>& v) {
      double s = 0;
      for (double x : v) s += x;
      return std::isnan(s) ? nlohmann::json(nullptr) : nlohmann::json(s / double(v.size()));
    };
    nlohmann::json g{{"AP", mean(ref[0])}, {"AP50", ref[0][0]}, {"AP75", ref[0][5]},
                     {"AP_M", mean(ref[1])}, {"AP_L", mean(ref[2])}};
    std::ofstream(golden_path) << g.dump(2) << '\n';
  }
  std::ifstream in(golden_path);
  ASSERT_TRUE(in) << golden_path;
  const nlohmann::json golden = nlohmann::json::parse(in);
  for (const char* key : {"AP", "AP50", "AP75", "AP_M", "AP_L"}) {
    EXPECT_EQ(got[key], golden[key]) << key;
  }
}

TEST(CocoIo, ParsesHandWrittenFixture) {
  const AnnotationSet s = load_coco_annotations(kData / "coco_two_images.json");
  ASSERT_EQ(s.images.size(), 2u);
  EXPECT_EQ(s.images[0].id, 7);
  EXPECT_EQ(s.images[1].file_name, "b.ppm");
  EXPECT_EQ(s.images[1].height, 48);
  ASSERT_EQ(s.annotations.size(), 3u);
  const Annotation& a = s.annotations[0];
  EXPECT_EQ(a.id, 101);
  EXPECT_EQ(a.image_id, 7);
  ASSERT_EQ(a.keypoints.size(), 17u);
  EXPECT_EQ(a.keypoints[3].x, 13.0);
  EXPECT_EQ(a.keypoints[3].y, 23.5);
  EXPECT_EQ(a.keypoints[3].v, 1);
  EXPECT_EQ(a.keypoints[4].v, 2);
  EXPECT_EQ(a.area, 1234.5);
  EXPECT_EQ(a.bbox[3], 50.0);
  EXPECT_FALSE(a.head_box.has_value());
  const Annotation& b = s.annotations[1];
  EXPECT_EQ(b.num_labeled(), 1u);
  EXPECT_EQ(b.keypoints[16].x, 300.25);
  ASSERT_TRUE(b.head_box.has_value());
  EXPECT_EQ((*b.head_box)[3], 4.0);
  EXPECT_TRUE(s.annotations[2].iscrowd);
  EXPECT_EQ(s.keypoint_names.size(), 17u);
}

TEST(CocoIo, ArityAndValueErrors) {
  using nlohmann::json;
  json rec{{"image_id", 1}, {"keypoints", json::array()}, {"score", 0.5}};
  for (int i = 0; i < 51; ++i) rec["keypoints"].push_back(i);
  EXPECT_EQ(parse_results(json::array({rec}))[0].keypoints.size(), 17u);

  json bad = rec;
  bad["keypoints"].erase(0);
  try {
    parse_results(json::array({rec, bad}));
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.category(), "parse-error");
    EXPECT_NE(std::string(e.what()).find("[1]"), std::string::npos);
  }
  json no_score = rec;
  no_score.erase("score");
  EXPECT_THROW(parse_results(json::array({no_score})), ParseError);
  EXPECT_THROW(parse_results(json::object()), ParseError);

  json ann{{"id", 1}, {"image_id", 1}, {"keypoints", rec["keypoints"]}, {"area", 10}};
  for (std::size_t i = 2; i < 51; i += 3) ann["keypoints"][i] = 2;
  EXPECT_NO_THROW(parse_coco_annotations(json{{"annotations", json::array({ann})}}));
  ann["keypoints"][2] = 5;
  EXPECT_THROW(parse_coco_annotations(json{{"annotations", json::array({ann})}}), ParseError);
  ann["keypoints"][2] = 2;
  ann["area"] = 0;
  EXPECT_THROW(parse_coco_annotations(json{{"annotations", json::array({ann})}}), ParseError);

  const auto path = std::filesystem::temp_directory_path() / "posekit_bad.json";
  std::ofstream(path) << "[{\"image_id\": 1,";
  EXPECT_THROW(load_results(path), ParseError);
  std::filesystem::remove(path);
  EXPECT_THROW(load_results("/nonexistent/results.json"), InputError);
}

TEST(CocoIo, ResultsRoundTripBitExact) {
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> u(-1e4, 1e4);
  std::vector<ResultRecord> recs(20);
  for (std::size_t i = 0; i < recs.size(); ++i) {
    recs[i].image_id = std::int64_t(i * 3);
    recs[i].score = u(rng) / 1e4;
    if (i % 3 == 0) recs[i].annotation_id = std::int64_t(i);
    for (int k = 0; k < 17; ++k) recs[i].keypoints.push_back({u(rng), u(rng), u(rng) / 1e4});
  }
  const auto path = std::filesystem::temp_directory_path() / "posekit_results.json";
  write_results(path, recs);
  const auto back = load_results(path);
  ASSERT_EQ(back.size(), recs.size());
  for (std::size_t i = 0; i < recs.size(); ++i) {
    EXPECT_EQ(back[i].image_id, recs[i].image_id);
    EXPECT_EQ(back[i].score, recs[i].score);
    EXPECT_EQ(back[i].annotation_id, recs[i].annotation_id);
    for (int k = 0; k < 17; ++k) {
      EXPECT_EQ(back[i].keypoints[k].x, recs[i].keypoints[k].x);
      EXPECT_EQ(back[i].keypoints[k].y, recs[i].keypoints[k].y);
      EXPECT_EQ(back[i].keypoints[k].score, recs[i].keypoints[k].score);
    }
  }
  std::filesystem::remove(path);
}

TEST(Pckh, ExactAndDisplacedPredictions) {
  std::mt19937 rng(8);
  AnnotationSet gts;
  std::vector<ResultRecord> exact, displaced;
  for (int i = 0; i < 6; ++i) {
    Annotation a = make_gt(rng, 16, 100);
    a.id = i + 1;
    a.image_id = 1;
    a.head_box = std::array<double, 4>{10, 10, 10 + 3.0 * (i + 1), 10 + 4.0 * (i + 1)};
    gts.annotations.push_back(a);
    ResultRecord r = as_result(a, 1.0);
    exact.push_back(r);
    const double ref = head_reference(*a.head_box, 0.6);
    for (auto& k : r.keypoints) {
      const double angle = double(rng() % 360) * M_PI / 180.0;
      k.x += 0.3 * ref * std::cos(angle);
      k.y += 0.3 * ref * std::sin(angle);
    }
    displaced.push_back(r);
  }
  PckhConfig cfg;
  cfg.fractions = {0.5, 0.1, 0.0};
  const PckhReport e = pckh(exact, gts, cfg);
  EXPECT_EQ(e.mean(), 1.0);
  EXPECT_EQ(e.mean_at_01(), 1.0);
  EXPECT_EQ(e.at(0.0), 1.0);
  const PckhReport d = pckh(displaced, gts, cfg);
  EXPECT_EQ(d.mean(), 1.0);
  EXPECT_EQ(d.mean_at_01(), 0.0);
  EXPECT_EQ(d.at(0.0), 0.0);

  cfg.fractions = {kInf};
  EXPECT_EQ(pckh(displaced, gts, cfg).accuracy[0], 1.0);
}

TEST(Pckh, SkipsRecordsWithoutHeadBox) {
  const AnnotationSet gts = load_coco_annotations(kData / "mpii_toy.json");
  const auto preds = load_results(kData / "mpii_toy_results.json");
  const PckhReport r = pckh(preds, gts);
  EXPECT_EQ(r.skipped_no_head_box, 1u);
  EXPECT_EQ(r.evaluated_records, 2u);
  EXPECT_EQ(r.evaluated_keypoints, 34u);
  EXPECT_GE(r.mean(), r.mean_at_01());
  const auto j = to_json(r);
  EXPECT_TRUE(j.contains("Mean"));
  EXPECT_TRUE(j.contains("Mean@0.1"));
}

TEST(Pckh, PairsByOrderWithoutAnnotationIds) {
  AnnotationSet gts;
  for (int i = 0; i < 3; ++i) {
    Annotation a;
    a.id = i;
    a.image_id = 4;
    a.area = 1;
    a.keypoints = {{double(i), 0, 2}};
    a.head_box = std::array<double, 4>{0, 0, 3, 4};
    gts.annotations.push_back(a);
  }
  std::vector<ResultRecord> preds;
  for (int i = 0; i < 2; ++i) preds.push_back(as_result(gts.annotations[std::size_t(i)], 1.0));
  const PckhReport r = pckh(preds, gts, PckhConfig{0.6, {0.0}});
  EXPECT_EQ(r.unpaired_records, 1u);
  EXPECT_DOUBLE_EQ(r.accuracy[0], 2.0 / 3.0);

  preds[0].annotation_id = 77;
  EXPECT_THROW(pckh(preds, gts), IngestionError);
}
