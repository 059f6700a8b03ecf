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

// Command implementations behind the posekit binary. Each command returns
// the text it would print; argument parsing lives in tools/.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "posekit/config/settings.hpp"
#include "posekit/core/error.hpp"
#include "posekit/core/parallel.hpp"
#include "posekit/eval/coco_eval.hpp"
#include "posekit/eval/coco_io.hpp"
#include "posekit/eval/pckh.hpp"
#include "posekit/model/builders.hpp"
#include "posekit/model/flops.hpp"
#include "posekit/model/weights_io.hpp"
#include "posekit/pipeline/image.hpp"
#include "posekit/pipeline/infer.hpp"

namespace posekit::cli {

enum class Format { json, csv };

struct CommonOptions {
  std::string model = "movepose";  // movepose | lite
  std::optional<std::string> weights;
  std::size_t input_size = 256;
  bool flip_test = false;
  int threads = 1;
  std::uint32_t seed = 0;
  Format format = Format::json;
  std::string upsample = "deconv";  // deconv | bilinear
  std::optional<std::size_t> kernel;  // uniform large-kernel size
};

inline model::ModelConfig model_config(const CommonOptions& o, std::size_t keypoints) {
  model::ModelConfig c;
  c.keypoints = keypoints;
  c.input_size = o.input_size;
  if (o.upsample == "bilinear") {
    c.upsample = model::UpsampleMode::bilinear;
  } else if (o.upsample != "deconv") {
    throw ConfigError("unknown upsample mode '" + o.upsample + "'");
  }
  if (o.kernel) c.set_uniform_kernel(*o.kernel);
  c.validate();
  return c;
}

inline model::Graph build_graph(const CommonOptions& o, std::size_t keypoints) {
  const model::ModelConfig c = model_config(o, keypoints);
  if (o.model == "movepose") return model::build_movepose(c);
  if (o.model == "lite") return model::build_lite(c);
  throw ConfigError("unknown model '" + o.model + "'");
}

// Weights come from --weights when given, otherwise from the seed.
inline model::Graph load_model(const CommonOptions& o, std::size_t keypoints,
                               std::vector<std::string>* warnings) {
  model::Graph g = build_graph(o, keypoints);
  if (o.weights) return model::load_weights(*o.weights, std::move(g), warnings);
  model::init_random(g, o.seed);
  return g;
}

inline std::string dump(const nlohmann::json& j) { return j.dump(2) + "\n"; }

inline std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

// ---- init-weights ----------------------------------------------------------

inline std::string cmd_init_weights(const CommonOptions& o, const std::filesystem::path& out) {
  const config::Settings s = config::resolve_settings();
  model::Graph g = build_graph(o, s.keypoint_names.size());
  model::init_random(g, o.seed);
  model::save_weights(out, g);
  return "wrote " + std::to_string(g.parameter_specs().size()) + " tensors to " + out.string() +
         "\n";
}

// ---- infer -----------------------------------------------------------------

struct InferRequest {
  std::filesystem::path image;
  std::vector<pipeline::PersonBox> boxes;  // empty: whole image
  std::optional<std::filesystem::path> boxes_json;
  std::int64_t image_id = 0;
};

inline pipeline::PersonBox parse_box(const std::string& text) {
  std::vector<double> v;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      v.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw ConfigError("box '" + text + "' must be x,y,w,h");
    }
  }
  if (v.size() != 4) throw ConfigError("box '" + text + "' must be x,y,w,h");
  pipeline::PersonBox b(v[0], v[1], v[2], v[3]);
  b.validate();
  return b;
}

// Accepts [[x,y,w,h], ...] or [{"bbox": [x,y,w,h], "score": s}, ...].
inline std::vector<pipeline::PersonBox> load_boxes(const std::filesystem::path& path) {
  const nlohmann::json j = eval::detail::read_json_file(path);
  if (!j.is_array()) throw ParseError(path.string() + ": expected an array of boxes");
  std::vector<pipeline::PersonBox> out;
  for (std::size_t i = 0; i < j.size(); ++i) {
    const nlohmann::json& rec = j[i];
    const nlohmann::json& bb = rec.is_object() ? rec.value("bbox", nlohmann::json()) : rec;
    if (!bb.is_array() || bb.size() != 4) {
      throw ParseError(path.string() + ": boxes[" + std::to_string(i) + "] must hold 4 numbers");
    }
    for (const auto& n : bb) {
      if (!n.is_number()) {
        throw ParseError(path.string() + ": boxes[" + std::to_string(i) + "] must hold 4 numbers");
      }
    }
    pipeline::PersonBox b(bb[0].get<double>(), bb[1].get<double>(), bb[2].get<double>(),
                          bb[3].get<double>());
    if (rec.is_object() && rec.contains("score") && rec["score"].is_number()) {
      b.score = rec["score"].get<double>();
    }
    b.validate();
    out.push_back(b);
  }
  return out;
}

struct InferResult {
  std::vector<eval::ResultRecord> records;
  std::size_t forward_calls = 0;
};

inline InferResult run_infer(const CommonOptions& o, const InferRequest& req,
                             std::vector<std::string>* warnings) {
  const config::Settings s = config::resolve_settings();
  const model::Graph g = load_model(o, s.keypoint_names.size(), warnings);
  const pipeline::Image img = pipeline::read_ppm(req.image);

  std::vector<pipeline::PersonBox> boxes = req.boxes;
  if (req.boxes_json) {
    const auto more = load_boxes(*req.boxes_json);
    boxes.insert(boxes.end(), more.begin(), more.end());
  }
  if (boxes.empty()) boxes.emplace_back(0.0, 0.0, double(img.width), double(img.height));

  pipeline::InferOptions opts;
  opts.flip_test = o.flip_test;
  opts.flip_pairs = s.flip_pairs;
  opts.spec = s.preprocess;

  pipeline::InferTrace trace;
  InferResult r;
  for (const auto& box : boxes) {
    const decode::PosePrediction p = pipeline::infer_person(g, img, box, opts, &trace);
    eval::ResultRecord rec;
    rec.image_id = req.image_id;
    rec.category_id = 1;
    rec.keypoints = p.keypoints;
    rec.score = p.mean_score();
    r.records.push_back(std::move(rec));
  }
  r.forward_calls = trace.forward_calls.load();
  return r;
}

inline std::string render_infer(const InferResult& r, const CommonOptions& o,
                                const std::vector<std::string>& names) {
  if (o.format == Format::json) return dump(eval::results_to_json(r.records));
  std::string s = "image_id,person,keypoint,name,x,y,score\n";
  for (std::size_t p = 0; p < r.records.size(); ++p) {
    const auto& rec = r.records[p];
    for (std::size_t k = 0; k < rec.keypoints.size(); ++k) {
      s += std::to_string(rec.image_id) + "," + std::to_string(p) + "," + std::to_string(k) + "," +
           (k < names.size() ? names[k] : "") + "," + fmt(rec.keypoints[k].x) + "," +
           fmt(rec.keypoints[k].y) + "," + fmt(rec.keypoints[k].score) + "\n";
    }
  }
  return s;
}

// ---- eval ------------------------------------------------------------------

struct EvalRequest {
  std::filesystem::path results;
  std::filesystem::path annotations;
  std::string metric = "coco";  // coco | pckh
  bool curves = false;
};

inline std::string cmd_eval(const CommonOptions& o, const EvalRequest& req) {
  const config::Settings s = config::resolve_settings();
  const std::size_t K = s.keypoint_names.size();
  const eval::AnnotationSet gts = eval::load_coco_annotations(req.annotations, K);
  const std::size_t gk = gts.annotations.empty() ? K : gts.annotations.front().keypoints.size();
  const auto results = eval::load_results(req.results, gk);
  if (req.metric == "coco") {
    const eval::APReport rep = eval::evaluate_coco(results, gts, s.oks);
    return o.format == Format::json ? dump(eval::to_json(rep, req.curves)) : eval::to_csv(rep);
  }
  if (req.metric == "pckh") {
    const eval::PckhReport rep = eval::pckh(results, gts, s.pckh);
    return o.format == Format::json ? dump(eval::to_json(rep)) : eval::to_csv(rep);
  }
  throw ConfigError("unknown metric '" + req.metric + "'");
}

// ---- bench -----------------------------------------------------------------

struct BenchRequest {
  std::size_t iters = 50;
  std::size_t warmup = 5;
};

struct BenchReport {
  std::string model;
  std::string upsample;
  std::size_t input_size = 0;
  int threads = 1;
  bool flip_test = false;
  std::size_t warmup = 0;
  std::size_t iters = 0;
  std::vector<double> samples_ms;
  double mean_ms = 0.0;
  double median_ms = 0.0;
  double p95_ms = 0.0;
  double fps = 0.0;
};

// Nearest-rank percentile of an unsorted sample.
inline double percentile(std::vector<double> v, double q) {
  if (v.empty()) return std::nan("");
  std::sort(v.begin(), v.end());
  const double rank = std::ceil(q / 100.0 * double(v.size()));
  const std::size_t i = rank < 1.0 ? 0 : std::size_t(rank) - 1;
  return v[std::min(i, v.size() - 1)];
}

inline double median(std::vector<double> v) {
  if (v.empty()) return std::nan("");
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

inline void summarize(BenchReport& r) {
  double sum = 0.0;
  for (double s : r.samples_ms) sum += s;
  r.mean_ms = sum / double(r.samples_ms.size());
  r.median_ms = median(r.samples_ms);
  r.p95_ms = percentile(r.samples_ms, 95.0);
  r.fps = 1000.0 / r.mean_ms;
}

namespace detail {

inline bool same_bits(const Tensor& a, const Tensor& b) {
  return a.shape() == b.shape() &&
         std::memcmp(a.data().data(), b.data().data(), a.size() * sizeof(float)) == 0;
}

inline bool same_output(const model::HeadOutput& a, const model::HeadOutput& b) {
  return same_bits(a.simcc_x, b.simcc_x) && same_bits(a.simcc_y, b.simcc_y) &&
         same_bits(a.heatmaps, b.heatmaps);
}

}  // namespace detail

// Times forward (+ mirrored forward when flipping) + decode on one fixed
// random input. Every iteration must reproduce the first one's raw outputs.
inline BenchReport run_bench(const CommonOptions& o, const BenchRequest& req,
                             std::vector<std::string>* warnings) {
  if (req.iters < 1) throw ConfigError("bench needs --iters >= 1");
  const config::Settings s = config::resolve_settings();
  const model::Graph g = load_model(o, s.keypoint_names.size(), warnings);
  const Shape& in = g.input_shape();

  std::mt19937 rng(o.seed);
  const Tensor x = random_tensor(in, rng, -2.0f, 2.0f);
  const Tensor xm = pipeline::mirror_columns(x);

  std::optional<model::HeadOutput> ref, ref_flip;
  auto step = [&](std::size_t iter) {
    model::HeadOutput out = model::forward(g, x);
    std::optional<model::HeadOutput> fl;
    if (o.flip_test) fl = model::forward(g, xm);
    const decode::PosePrediction p = pipeline::decode_head(
        out, fl ? &*fl : nullptr, s.flip_pairs, in[3], in[2]);
    (void)p;
    if (!ref) {
      ref = std::move(out);
      ref_flip = std::move(fl);
      return;
    }
    if (!detail::same_output(*ref, out) || (fl && !detail::same_output(*ref_flip, *fl))) {
      throw Error("nondeterministic-output",
                  "model output at iteration " + std::to_string(iter) + " differs from the first");
    }
  };

  BenchReport r;
  r.model = o.model;
  r.upsample = o.upsample;
  r.input_size = o.input_size;
  r.threads = num_threads();
  r.flip_test = o.flip_test;
  r.warmup = req.warmup;
  r.iters = req.iters;
  for (std::size_t i = 0; i < req.warmup; ++i) step(i);
  r.samples_ms.reserve(req.iters);
  for (std::size_t i = 0; i < req.iters; ++i) {
    const auto t0 = std::chrono::steady_clock::now();
    step(req.warmup + i);
    const auto t1 = std::chrono::steady_clock::now();
    r.samples_ms.push_back(std::chrono::duration<double, std::milli>(t1 - t0).count());
  }
  summarize(r);
  return r;
}

inline std::string render_bench(const BenchReport& r, Format f, bool timing) {
  if (f == Format::json) {
    nlohmann::json j{{"model", r.model},         {"upsample", r.upsample},
                     {"input_size", r.input_size}, {"threads", r.threads},
                     {"flip_test", r.flip_test},   {"warmup", r.warmup},
                     {"iters", r.iters}};
    if (timing) {
      j["samples_ms"] = r.samples_ms;
      j["mean_ms"] = r.mean_ms;
      j["median_ms"] = r.median_ms;
      j["p95_ms"] = r.p95_ms;
      j["fps"] = r.fps;
    }
    return dump(j);
  }
  std::string s = "model,upsample,input_size,threads,flip_test,warmup,iters";
  if (timing) s += ",mean_ms,median_ms,p95_ms,fps";
  s += "\n" + r.model + "," + r.upsample + "," + std::to_string(r.input_size) + "," +
       std::to_string(r.threads) + "," + (r.flip_test ? "true" : "false") + "," +
       std::to_string(r.warmup) + "," + std::to_string(r.iters);
  if (timing) s += "," + fmt(r.mean_ms) + "," + fmt(r.median_ms) + "," + fmt(r.p95_ms) + "," + fmt(r.fps);
  return s + "\n";
}

// ---- flops -----------------------------------------------------------------

// `graph_json`, when set, audits a serialized graph instead of a built-in model.
inline std::string cmd_flops(const CommonOptions& o, bool sweep,
                             const std::optional<std::filesystem::path>& graph_json = {}) {
  if (graph_json) {
    if (sweep) throw ConfigError("--kernel-sweep applies to built-in models only");
    const model::FlopReport r =
        model::count_flops(model::graph_from_json(eval::detail::read_json_file(*graph_json)));
    return o.format == Format::json ? dump(model::to_json(r)) : model::to_csv(r);
  }
  const config::Settings s = config::resolve_settings();
  const std::size_t K = s.keypoint_names.size();
  if (!sweep) {
    const model::FlopReport r = model::count_flops(build_graph(o, K));
    return o.format == Format::json ? dump(model::to_json(r)) : model::to_csv(r);
  }
  nlohmann::json rows = nlohmann::json::array();
  std::string csv = "kernel,total_macs,total_flops,gflops,max_receptive_field\n";
  for (std::size_t k : {3, 5, 7}) {
    CommonOptions ok = o;
    ok.kernel = k;
    const model::FlopReport r = model::count_flops(build_graph(ok, K));
    rows.push_back({{"kernel", k},
                    {"total_macs", r.total_macs},
                    {"total_flops", r.total_flops},
                    {"gflops", r.gflops()},
                    {"max_receptive_field", r.max_receptive_field()}});
    char rf[32];
    std::snprintf(rf, sizeof rf, "%g", r.max_receptive_field());
    csv += std::to_string(k) + "," + std::to_string(r.total_macs) + "," +
           std::to_string(r.total_flops) + "," + fmt(r.gflops()) + "," + rf + "\n";
  }
  if (o.format == Format::csv) return csv;
  return dump({{"model", o.model}, {"input_size", o.input_size}, {"sweep", rows}});
}

}  // namespace posekit::cli
