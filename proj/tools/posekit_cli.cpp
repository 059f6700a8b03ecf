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

// posekit: inference, evaluation, FLOP audit and latency benchmark.

#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "posekit/cli/commands.hpp"

namespace {

using posekit::cli::CommonOptions;
using posekit::cli::Format;

struct Shared {
  CommonOptions opts;
  std::string format = "json";
  std::string output;
  bool no_timing = false;
  bool trace = false;
};

void add_common(CLI::App* cmd, Shared& s) {
  cmd->add_option("--model", s.opts.model, "Model variant")
      ->check(CLI::IsMember({"movepose", "lite"}));
  cmd->add_option_function<std::string>(
      "--weights", [&s](const std::string& p) { s.opts.weights = p; },
      "MVPW weight file (default: random weights from --seed)");
  cmd->add_option("--input-size", s.opts.input_size, "Square input size in pixels");
  cmd->add_flag("--flip-test", s.opts.flip_test, "Average with the mirrored pass");
  cmd->add_option("--threads", s.opts.threads, "Worker threads")->check(CLI::PositiveNumber);
  cmd->add_option("--seed", s.opts.seed, "Seed for random weights and inputs");
  cmd->add_option("--output", s.output, "Write the report here instead of stdout");
  cmd->add_option("--format", s.format, "Report format")->check(CLI::IsMember({"json", "csv"}));
  cmd->add_flag("--no-timing", s.no_timing, "Omit wall-clock fields from reports");
  cmd->add_flag("--trace", s.trace, "Print forward-call counts to stderr");
}

void emit(const Shared& s, const std::string& text) {
  if (s.output.empty()) {
    std::cout << text << std::flush;
    return;
  }
  std::ofstream out(s.output, std::ios::trunc | std::ios::binary);
  if (!out) throw posekit::InputError("cannot write '" + s.output + "'");
  out << text;
  if (!out) throw posekit::InputError("short write to '" + s.output + "'");
}

void print_warnings(const std::vector<std::string>& warnings) {
  for (const auto& w : warnings) std::cerr << "warning: " << w << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"posekit: top-down pose estimation toolkit"};
  app.require_subcommand(1);
  Shared s;

  auto* infer = app.add_subcommand("infer", "Estimate keypoints for person boxes in a PPM image");
  posekit::cli::InferRequest ireq;
  std::vector<std::string> box_text;
  std::string boxes_json;
  infer->add_option("--image", ireq.image, "Input image (binary PPM)")->required();
  infer->add_option("--box", box_text, "Person box x,y,w,h (repeatable)");
  infer->add_option("--boxes", boxes_json, "JSON file of person boxes");
  infer->add_option("--image-id", ireq.image_id, "image_id written to results");
  add_common(infer, s);

  auto* evalc = app.add_subcommand("eval", "Score COCO-format results against annotations");
  posekit::cli::EvalRequest ereq;
  evalc->add_option("--results", ereq.results, "Results JSON")->required();
  evalc->add_option("--annotations,--gt", ereq.annotations, "Annotations JSON")->required();
  evalc->add_option("--metric", ereq.metric, "coco or pckh")
      ->check(CLI::IsMember({"coco", "pckh"}));
  evalc->add_flag("--curves", ereq.curves, "Include precision curves in JSON output");
  add_common(evalc, s);

  auto* bench = app.add_subcommand("bench", "Measure forward + decode latency");
  posekit::cli::BenchRequest breq;
  bench->add_option("--iters", breq.iters, "Measured iterations");
  bench->add_option("--warmup", breq.warmup, "Unmeasured warmup iterations");
  bench->add_option("--upsample", s.opts.upsample, "Decoder upsampling")
      ->check(CLI::IsMember({"deconv", "bilinear"}));
  add_common(bench, s);

  auto* flops = app.add_subcommand("flops", "Per-layer FLOP and receptive-field audit");
  bool sweep = false;
  std::size_t kernel = 0;
  std::string graph_json;
  flops->add_option("--graph", graph_json, "Audit a graph JSON file instead of a built-in model");
  flops->add_flag("--kernel-sweep", sweep, "Report totals for large kernels 3, 5, 7");
  flops->add_option("--kernel", kernel, "Uniform large-kernel size");
  flops->add_option("--upsample", s.opts.upsample, "Decoder upsampling")
      ->check(CLI::IsMember({"deconv", "bilinear"}));
  add_common(flops, s);

  auto* initw = app.add_subcommand("init-weights", "Write seeded random weights to a file");
  initw->add_option("--upsample", s.opts.upsample, "Decoder upsampling")
      ->check(CLI::IsMember({"deconv", "bilinear"}));
  add_common(initw, s);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    std::cerr << "error [usage-error]: " << e.what() << "\n";
    return 2;
  }

  try {
    s.opts.format = s.format == "csv" ? Format::csv : Format::json;
    if (kernel != 0) s.opts.kernel = kernel;
    posekit::set_num_threads(s.opts.threads);
    std::vector<std::string> warnings;

    if (infer->parsed()) {
      for (const auto& b : box_text) ireq.boxes.push_back(posekit::cli::parse_box(b));
      if (!boxes_json.empty()) ireq.boxes_json = boxes_json;
      const auto r = posekit::cli::run_infer(s.opts, ireq, &warnings);
      print_warnings(warnings);
      if (s.trace) std::cerr << "trace: forward_calls=" << r.forward_calls << "\n";
      const auto names = posekit::config::resolve_settings().keypoint_names;
      emit(s, posekit::cli::render_infer(r, s.opts, names));
    } else if (evalc->parsed()) {
      emit(s, posekit::cli::cmd_eval(s.opts, ereq));
    } else if (bench->parsed()) {
      const auto r = posekit::cli::run_bench(s.opts, breq, &warnings);
      print_warnings(warnings);
      emit(s, posekit::cli::render_bench(r, s.opts.format, !s.no_timing));
    } else if (flops->parsed()) {
      std::optional<std::filesystem::path> graph;
      if (!graph_json.empty()) graph = graph_json;
      emit(s, posekit::cli::cmd_flops(s.opts, sweep, graph));
    } else if (initw->parsed()) {
      if (s.output.empty()) throw posekit::ConfigError("init-weights needs --output PATH");
      std::cerr << posekit::cli::cmd_init_weights(s.opts, s.output);
    }
  } catch (const posekit::Error& e) {
    std::cerr << "error [" << e.category() << "]: " << e.what() << "\n";
    return posekit::exit_code_for(e.category());
  } catch (const std::exception& e) {
    std::cerr << "error [internal-error]: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
