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

#include "comparison.h"

#include <charconv>

#include "iassa/error.h"

namespace iassa::cli {
namespace {

void Append(std::string& out, double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  out.push_back(',');
  out.append(buf, res.ptr);
}

void Accumulate(MetricValues& acc, const MetricValues& v) {
  acc.deletion_auc += v.deletion_auc;
  acc.insertion_auc += v.insertion_auc;
  acc.f1 += v.f1;
  acc.iou += v.iou;
  acc.pointing += v.pointing;
}

MetricValues Scale(MetricValues v, double f) {
  return {v.deletion_auc * f, v.insertion_auc * f, v.f1 * f, v.iou * f,
          v.pointing * f};
}

}  // namespace

ExplainConfig SuiteConfig(const ComparisonOptions& options) {
  ExplainConfig cfg = ExplainConfig{}.ScaledTo(options.scene.side);
  cfg.max_iters = options.max_iters;
  cfg.lambda_reg = options.lambda_reg;
  cfg.t_thresh = options.t_thresh;
  cfg.threads = options.threads;
  cfg.rise = options.rise;
  cfg.seed = options.seed;
  return cfg;
}

std::string Comparison::ToCsv() const {
  std::string out =
      "method,deletion_auc,insertion_auc,f1,iou,pointing,"
      "px_deletion_auc,px_insertion_auc,px_f1,px_iou,px_pointing\n";
  for (const MethodSummary& m : methods) {
    out += m.method;
    for (const MetricValues* v : {&m.image_level, &m.pixel_level}) {
      Append(out, v->deletion_auc);
      Append(out, v->insertion_auc);
      Append(out, v->f1);
      Append(out, v->iou);
      Append(out, v->pointing);
    }
    out.push_back('\n');
  }
  return out;
}

const MethodSummary& Comparison::Get(const std::string& method) const {
  for (const MethodSummary& m : methods) {
    if (m.method == method) return m;
  }
  throw ArgumentError("no results for method '" + method + "'");
}

Comparison RunComparison(const ComparisonOptions& options) {
  if (options.scenes < 1) throw ArgumentError("the suite needs at least one scene");
  const ExplainConfig base = SuiteConfig(options);
  base.Validate();
  const std::vector<SyntheticScene> suite =
      MakeSceneSuite(options.scenes, options.seed, options.scene);

  Comparison out;
  for (const char* name : {"iassa", "rise", "occlusion"}) {
    out.methods.emplace_back().method = name;
  }
  EvalOptions eval;
  eval.t_thresh = options.t_thresh;
  eval.curve.batch.threads = options.threads;

  for (size_t i = 0; i < suite.size(); ++i) {
    const SyntheticScene& scene = suite[i];
    SyntheticRegionScorer scorer(scene.target);
    SyntheticPyramidProvider provider;
    ExplainConfig cfg = base;
    cfg.seed = options.seed + i;

    const ExplanationResult results[] = {
        Explain(scene.image, scorer, provider, cfg),
        ExplainRiseBaseline(scene.image, scorer, cfg),
        ExplainOcclusion(scene.image, scorer, cfg),
    };
    for (size_t m = 0; m < out.methods.size(); ++m) {
      const Evaluation e = Evaluate(scorer, scene.image, results[m].final_map,
                                    scene.target, results[m].target_class, eval);
      out.methods[m].per_scene.push_back(e.report);
    }
  }

  const double inv = 1.0 / static_cast<double>(suite.size());
  for (MethodSummary& m : out.methods) {
    for (const EvalReport& r : m.per_scene) {
      Accumulate(m.image_level, r.image_level());
      Accumulate(m.pixel_level, r.pixel_level);
      m.pointing_hits += r.pointing_hit;
    }
    m.image_level = Scale(m.image_level, inv);
    m.pixel_level = Scale(m.pixel_level, inv);
  }
  return out;
}

}  // namespace iassa::cli
