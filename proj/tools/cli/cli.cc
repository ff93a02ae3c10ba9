// Copyright 2026 The IASSA Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "cli.h"

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <utility>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "comparison.h"
#include "iassa/engine.h"
#include "iassa/error.h"
#include "iassa/image_io.h"
#include "iassa/metrics.h"
#include "iassa/synthetic.h"
#include "oracle_setup.h"

namespace iassa::cli {
namespace {

namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;
using nlohmann::json;

constexpr int kDefaultSide = 224;
constexpr char kVersion[] = "0.1.0";

// Wall-clock seconds per named stage, for the manifest only.
class StageTimer {
 public:
  template <typename F>
  decltype(auto) Run(const std::string& stage, F&& fn) {
    const auto start = Clock::now();
    struct Record {
      StageTimer* timer;
      const std::string& stage;
      Clock::time_point start;
      ~Record() {
        timer->stages_[stage] =
            std::chrono::duration<double>(Clock::now() - start).count();
      }
    } record{this, stage, start};
    return std::forward<F>(fn)();
  }

  const json& stages() const { return stages_; }

 private:
  json stages_ = json::object();
};

std::string Dump(const json& doc) { return doc.dump(2) + "\n"; }

void PrepareOutDir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) {
    throw IoError("cannot create output directory '" + dir.string() + "'");
  }
}

json BaseManifest(const std::string& command,
                  const std::vector<std::string>& args) {
  return {{"tool", "iassa"},
          {"version", kVersion},
          {"command", command},
          {"argv", args}};
}

// Options shared by the commands that talk to an oracle.
struct OracleArgs {
  std::string oracle;
  int timeout_ms = 30000;
  int threads = 1;
  size_t batch_size = 256;

  void Register(CLI::App* cmd) {
    cmd->add_option("--oracle", oracle,
                    "builtin:<name>[=arg], exec:<path> [args], or http:<url>; "
                    "defaults to $IASSA_ORACLE");
    cmd->add_option("--timeout-ms", timeout_ms, "Oracle inactivity timeout")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--threads", threads, "Worker threads")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--batch-size", batch_size, "Images per oracle request")
        ->check(CLI::PositiveNumber);
  }

  std::string Resolve() const {
    if (!oracle.empty()) return oracle;
    if (const char* env = std::getenv("IASSA_ORACLE"); env && *env) return env;
    throw ArgumentError("no oracle given: pass --oracle or set IASSA_ORACLE");
  }

  std::chrono::milliseconds timeout() const {
    return std::chrono::milliseconds(timeout_ms);
  }
};

struct ExplainArgs {
  OracleArgs oracle;
  std::string image;
  std::string features;
  std::string out_dir = ".";
  std::string format = "smap";
  std::string method = "iassa";
  std::string adjust_mode = "convex";
  std::optional<int> iters;
  std::optional<double> lambda;
  std::optional<double> t_thresh;
  std::optional<double> epsilon;
  std::optional<int> window;
  std::optional<int> stride;
  std::optional<int> target_class;
  std::optional<int> rise_masks;
  int side = 0;
  uint64_t seed = 0;
  bool emit_raw = false;
};

ImageTensor LoadInput(const std::string& path, int requested_side,
                      int& side) {
  ImageTensor image = LoadImage(path);
  if (requested_side > 0) {
    side = requested_side;
  } else {
    side = image.height() == image.width() ? image.height() : kDefaultSide;
  }
  if (image.height() != side || image.width() != side) {
    image = ResizeBilinear(image, side, side);
  }
  return image;
}

int CmdExplain(const ExplainArgs& a, const std::vector<std::string>& argv,
               std::ostream& out, std::ostream& err) {
  StageTimer timer;
  const SaliencyFormat format = ParseSaliencyFormat(a.format);
  const AdjustMode mode = ParseAdjustMode(a.adjust_mode);
  if (a.method != "iassa" && a.method != "rise" && a.method != "occlusion") {
    throw ArgumentError("unknown method '" + a.method + "'");
  }
  const std::string descriptor = a.oracle.Resolve();

  int side = 0;
  const ImageTensor image =
      timer.Run("load", [&] { return LoadInput(a.image, a.side, side); });

  ExplainConfig cfg = ExplainConfig{}.ScaledTo(side);
  if (a.iters) cfg.max_iters = *a.iters;
  if (a.lambda) cfg.lambda_reg = *a.lambda;
  if (a.t_thresh) cfg.t_thresh = *a.t_thresh;
  if (a.epsilon) cfg.epsilon_conv = *a.epsilon;
  if (a.window) cfg.schedule.w0 = *a.window;
  if (a.stride) cfg.schedule.s0 = *a.stride;
  if (a.rise_masks) cfg.rise.mask_count = *a.rise_masks;
  cfg.adjust_mode = mode;
  cfg.target_class = a.target_class;
  cfg.seed = a.seed;
  cfg.threads = a.oracle.threads;
  cfg.batch_size = a.oracle.batch_size;
  cfg.emit_raw = a.emit_raw;
  cfg.Validate();

  const fs::path dir(a.out_dir);
  PrepareOutDir(dir);

  std::string features_name;
  OracleHandle oracle;
  std::shared_ptr<FeatureProvider> features;
  timer.Run("connect", [&] {
    oracle = OpenOracle(descriptor, image, a.oracle.timeout());
    if (a.method == "iassa") {
      features = OpenFeatures(a.features, oracle, a.oracle.timeout(),
                              &features_name);
    }
  });

  ExplanationResult result;
  try {
    result = timer.Run("explain", [&] {
      if (a.method == "rise") return ExplainRiseBaseline(image, *oracle.scorer, cfg);
      if (a.method == "occlusion") return ExplainOcclusion(image, *oracle.scorer, cfg);
      return Explain(image, *oracle.scorer, *features, cfg);
    });
  } catch (const ExplainAborted& e) {
    json partial = json::array();
    for (const IterationStats& it : e.partial()) {
      partial.push_back({{"k", it.k}, {"mask_count", it.mask_count}});
    }
    err << "oracle failed after " << e.partial().size()
        << " completed iterations: " << partial.dump() << "\n";
    throw;
  }

  const std::string map_name = "saliency" + std::string(FileExtension(format));
  json outputs = {{"saliency", map_name}, {"heatmap", "heatmap.png"},
                  {"explanation", "explanation.json"}};
  timer.Run("write", [&] {
    SaveSaliency(result.final_map, dir / map_name, format);
    SaveImage(RenderHeatmap(result.final_map), dir / "heatmap.png");
    if (result.raw_map) {
      const std::string raw_name = "raw" + std::string(FileExtension(format));
      SaveSaliency(*result.raw_map, dir / raw_name, format);
      outputs["raw"] = raw_name;
    }
    json doc = ResultToJson(result);
    doc["config"] = ConfigToJson(cfg);
    doc["image"] = {{"path", a.image}, {"side", side}};
    doc["outputs"] = outputs;
    WriteFileAtomically(dir / "explanation.json", Dump(doc));
  });

  json manifest = BaseManifest("explain", argv);
  manifest["config"] = ConfigToJson(cfg);
  manifest["seed"] = cfg.seed;
  manifest["threads"] = cfg.threads;
  manifest["method"] = a.method;
  manifest["inputs"] = {{"image", a.image}};
  manifest["oracle"] = descriptor;
  manifest["features"] = features_name.empty() ? json(nullptr) : json(features_name);
  manifest["outputs"] = outputs;
  manifest["stage_seconds"] = timer.stages();
  WriteFileAtomically(dir / "manifest.json", Dump(manifest));

  out << result.method << ": class " << result.target_class << ", "
      << result.per_iteration.size() << " iterations, "
      << result.TotalOracleCalls() << " oracle calls"
      << (result.converged_at ? ", converged" : ", budget exhausted") << "\n";
  return kExitOk;
}

struct EvaluateArgs {
  OracleArgs oracle;
  std::string image;
  std::string saliency;
  std::string gt;
  std::string out_dir = ".";
  std::optional<int> target_class;
  double t_thresh = 0.3;
  size_t step_px = 0;
  double blur_sigma = 0.0;
  float fill = 0.5f;
};

int CmdEvaluate(const EvaluateArgs& a, const std::vector<std::string>& argv,
                std::ostream& out) {
  StageTimer timer;
  const std::string descriptor = a.oracle.Resolve();
  ImageTensor image;
  SaliencyMap saliency;
  RegionMask gt;
  timer.Run("load", [&] {
    image = LoadImage(a.image);
    saliency = LoadSaliency(a.saliency);
    gt = LoadRegionMask(a.gt);
  });
  if (gt.height() != saliency.height() || gt.width() != saliency.width()) {
    throw ArgumentError("ground truth and saliency map dimensions differ");
  }
  if (image.height() != saliency.height() || image.width() != saliency.width()) {
    image = ResizeBilinear(image, saliency.height(), saliency.width());
  }
  const fs::path dir(a.out_dir);
  PrepareOutDir(dir);

  OracleHandle oracle = timer.Run(
      "connect", [&] { return OpenOracle(descriptor, image, a.oracle.timeout()); });
  EvalOptions options;
  options.t_thresh = a.t_thresh;
  options.curve.step_px = a.step_px;
  options.curve.blur_sigma = a.blur_sigma;
  options.curve.fill = a.fill;
  options.curve.batch = {a.oracle.batch_size, a.oracle.threads};

  int cls = 0;
  const Evaluation eval = timer.Run("evaluate", [&] {
    cls = a.target_class ? *a.target_class : TopClass(*oracle.scorer, image);
    return Evaluate(*oracle.scorer, image, saliency, gt, cls, options);
  });

  json report = ReportToJson(eval.report);
  report["target_class"] = cls;
  report["t_thresh"] = a.t_thresh;
  report["curve_points"] = eval.deletion.fractions.size();
  const json outputs = {{"report", "report.json"},
                        {"deletion", "deletion.csv"},
                        {"insertion", "insertion.csv"}};
  timer.Run("write", [&] {
    WriteFileAtomically(dir / "deletion.csv", eval.deletion.ToCsv());
    WriteFileAtomically(dir / "insertion.csv", eval.insertion.ToCsv());
    WriteFileAtomically(dir / "report.json", Dump(report));
  });

  json manifest = BaseManifest("evaluate", argv);
  manifest["inputs"] = {{"image", a.image}, {"saliency", a.saliency}, {"gt", a.gt}};
  manifest["oracle"] = descriptor;
  manifest["threads"] = a.oracle.threads;
  manifest["outputs"] = outputs;
  manifest["stage_seconds"] = timer.stages();
  WriteFileAtomically(dir / "manifest.json", Dump(manifest));

  const EvalReport& r = eval.report;
  out << "deletion " << r.deletion_auc << ", insertion " << r.insertion_auc
      << ", f1 " << r.f1 << ", iou " << r.iou << ", pointing "
      << (r.pointing_hit ? "hit" : "miss") << ", divisor " << r.pixel_norm_divisor
      << "\n";
  return kExitOk;
}

struct SuiteArgs {
  ComparisonOptions options;
  std::string out_dir = ".";
  std::optional<double> epsilon;
};

void RegisterSuite(CLI::App* cmd, SuiteArgs& s) {
  ComparisonOptions& o = s.options;
  cmd->add_option("--scenes", o.scenes, "Number of synthetic scenes")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--seed", o.seed, "Suite seed");
  cmd->add_option("--side", o.scene.side, "Scene side in pixels")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--target-side", o.scene.target_side, "Target side in pixels")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--iters", o.max_iters, "Iteration budget")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--lambda", o.lambda_reg, "Weight of the sampled map");
  cmd->add_option("--t-thresh", o.t_thresh, "HAR threshold");
  cmd->add_option("--threads", o.threads, "Worker threads")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--out-dir", s.out_dir, "Output directory");
}

int CmdCompare(const SuiteArgs& a, const std::vector<std::string>& argv,
               std::ostream& out) {
  StageTimer timer;
  const fs::path dir(a.out_dir);
  PrepareOutDir(dir);
  const Comparison result =
      timer.Run("compare", [&] { return RunComparison(a.options); });

  std::string per_scene =
      "method,scene,deletion_auc,insertion_auc,f1,iou,pointing,pixel_norm_divisor\n";
  for (const MethodSummary& m : result.methods) {
    for (size_t i = 0; i < m.per_scene.size(); ++i) {
      const EvalReport& r = m.per_scene[i];
      json row = json::array({r.deletion_auc, r.insertion_auc, r.f1, r.iou});
      per_scene += m.method + "," + std::to_string(i);
      for (const json& v : row) per_scene += "," + v.dump();
      per_scene += std::string(",") + (r.pointing_hit ? "1" : "0") + "," +
                   std::to_string(r.pixel_norm_divisor) + "\n";
    }
  }
  const std::string table = result.ToCsv();
  WriteFileAtomically(dir / "compare.csv", table);
  WriteFileAtomically(dir / "compare_scenes.csv", per_scene);

  json manifest = BaseManifest("compare", argv);
  manifest["config"] = ConfigToJson(SuiteConfig(a.options));
  manifest["seed"] = a.options.seed;
  manifest["scenes"] = a.options.scenes;
  manifest["threads"] = a.options.threads;
  manifest["oracle"] = "builtin:region";
  manifest["outputs"] = {{"table", "compare.csv"}, {"per_scene", "compare_scenes.csv"}};
  manifest["stage_seconds"] = timer.stages();
  WriteFileAtomically(dir / "manifest.json", Dump(manifest));
  out << table;
  return kExitOk;
}

int CmdBench(const SuiteArgs& a, const std::vector<std::string>& argv,
             std::ostream& out) {
  ExplainConfig cfg = SuiteConfig(a.options);
  if (a.epsilon) cfg.epsilon_conv = *a.epsilon;
  cfg.Validate();
  const std::vector<SyntheticScene> suite =
      MakeSceneSuite(a.options.scenes, a.options.seed, a.options.scene);

  json scenes = json::array();
  size_t total_calls = 0;
  double total_seconds = 0.0;
  for (size_t i = 0; i < suite.size(); ++i) {
    SyntheticRegionScorer scorer(suite[i].target);
    SyntheticPyramidProvider provider;
    json iterations = json::array();
    const auto start = Clock::now();
    auto last = start;
    const ExplanationResult result =
        Explain(suite[i].image, scorer, provider, cfg, [&](const IterationStats& it) {
          const auto now = Clock::now();
          iterations.push_back(
              {{"k", it.k},
               {"window", it.window},
               {"stride", it.stride},
               {"mask_count", it.mask_count},
               {"oracle_calls", it.oracle_calls},
               {"seconds", std::chrono::duration<double>(now - last).count()}});
          last = now;
        });
    const double seconds = std::chrono::duration<double>(Clock::now() - start).count();
    size_t calls = 0;
    for (const IterationStats& it : result.per_iteration) calls += it.oracle_calls;
    total_calls += calls;
    total_seconds += seconds;
    scenes.push_back({{"scene", i},
                      {"iterations", iterations},
                      {"oracle_calls", calls},
                      {"setup_oracle_calls", result.setup_oracle_calls},
                      {"converged_at", result.converged_at
                                           ? json(*result.converged_at)
                                           : json(nullptr)},
                      {"seconds", seconds}});
  }
  json doc = {{"side", a.options.scene.side},
              {"max_iters", cfg.max_iters},
              {"threads", cfg.threads},
              {"scenes", scenes},
              {"oracle_calls", total_calls},
              {"seconds", total_seconds}};
  const std::string text = Dump(doc);
  if (!a.out_dir.empty()) {
    const fs::path dir(a.out_dir);
    PrepareOutDir(dir);
    WriteFileAtomically(dir / "bench.json", text);
    json manifest = BaseManifest("bench", argv);
    manifest["config"] = ConfigToJson(cfg);
    manifest["seed"] = a.options.seed;
    manifest["outputs"] = {{"bench", "bench.json"}};
    manifest["stage_seconds"] = {{"bench", total_seconds}};
    WriteFileAtomically(dir / "manifest.json", Dump(manifest));
  }
  out << text;
  return kExitOk;
}

int ExitCodeFor(const std::exception& e) {
  if (dynamic_cast<const ArgumentError*>(&e)) return kExitUsage;
  if (dynamic_cast<const OracleError*>(&e)) return kExitOracle;
  if (dynamic_cast<const NumericError*>(&e)) return kExitOracle;
  if (dynamic_cast<const IoError*>(&e)) return kExitIo;
  if (dynamic_cast<const FormatError*>(&e)) return kExitIo;
  if (dynamic_cast<const fs::filesystem_error*>(&e)) return kExitIo;
  return kExitUsage;
}

}  // namespace

int Run(const std::vector<std::string>& args, std::ostream& out,
        std::ostream& err) {
  CLI::App app{"Black-box saliency maps by iterative adaptive sampling", "iassa"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);

  ExplainArgs ex;
  CLI::App* explain = app.add_subcommand("explain", "Explain one image");
  explain->add_option("--image", ex.image, "Input image (PPM/PGM/PNG)")->required();
  ex.oracle.Register(explain);
  explain->add_option("--features", ex.features,
                      "Feature provider: builtin:pyramid, exec: or http:");
  explain->add_option("--method", ex.method, "iassa, rise or occlusion");
  explain->add_option("--iters", ex.iters, "Iteration budget")
      ->check(CLI::PositiveNumber);
  explain->add_option("--lambda", ex.lambda, "Weight of the sampled map");
  explain->add_option("--t-thresh", ex.t_thresh, "HAR threshold");
  explain->add_option("--epsilon", ex.epsilon, "Convergence threshold");
  explain->add_option("--window", ex.window, "Initial window side")
      ->check(CLI::PositiveNumber);
  explain->add_option("--stride", ex.stride, "Initial stride")
      ->check(CLI::PositiveNumber);
  explain->add_option("--adjust-mode", ex.adjust_mode, "convex or literal");
  explain->add_option("--class", ex.target_class, "Class to explain (default: top-1)")
      ->check(CLI::NonNegativeNumber);
  explain->add_option("--rise-masks", ex.rise_masks, "Mask count for --method rise")
      ->check(CLI::PositiveNumber);
  explain->add_option("--side", ex.side,
                      "Working resolution (default: the image side if square, "
                      "else 224)")
      ->check(CLI::PositiveNumber);
  explain->add_option("--seed", ex.seed, "Seed for random masks");
  explain->add_option("--out-dir", ex.out_dir, "Output directory");
  explain->add_option("--format", ex.format, "Saliency file format: smap, csv or png");
  explain->add_flag("--emit-raw", ex.emit_raw, "Also write the pre-attention map");

  EvaluateArgs ev;
  CLI::App* evaluate =
      app.add_subcommand("evaluate", "Score a saliency map against ground truth");
  evaluate->add_option("--image", ev.image, "Input image")->required();
  evaluate->add_option("--saliency", ev.saliency, "Saliency map (SMAP or CSV)")
      ->required();
  evaluate->add_option("--gt", ev.gt, "Ground-truth mask image")->required();
  ev.oracle.Register(evaluate);
  evaluate->add_option("--class", ev.target_class, "Class (default: top-1)")
      ->check(CLI::NonNegativeNumber);
  evaluate->add_option("--t-thresh", ev.t_thresh, "F1/IoU threshold");
  evaluate->add_option("--step", ev.step_px, "Pixels per curve step (default HW/100)");
  evaluate->add_option("--blur-sigma", ev.blur_sigma,
                       "Insertion blur (default 10 px at 224)");
  evaluate->add_option("--fill", ev.fill, "Deletion grey level");
  evaluate->add_option("--out-dir", ev.out_dir, "Output directory");

  SuiteArgs cmp;
  CLI::App* compare = app.add_subcommand(
      "compare", "IASSA, RISE and occlusion on the synthetic suite");
  RegisterSuite(compare, cmp);
  compare->add_option("--rise-masks", cmp.options.rise.mask_count, "RISE mask count")
      ->check(CLI::PositiveNumber);

  SuiteArgs bench;
  bench.options.scenes = 1;
  bench.options.max_iters = 25;
  bench.out_dir.clear();
  CLI::App* bench_cmd =
      app.add_subcommand("bench", "Per-iteration timing on synthetic scenes");
  RegisterSuite(bench_cmd, bench);
  bench_cmd->add_option("--epsilon", bench.epsilon, "Convergence threshold");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*explain) return CmdExplain(ex, args, out, err);
    if (*evaluate) return CmdEvaluate(ev, args, out);
    if (*compare) return CmdCompare(cmp, args, out);
    if (*bench_cmd) return CmdBench(bench, args, out);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return ExitCodeFor(e);
  }
  return kExitUsage;
}

}  // namespace iassa::cli
