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

#ifndef IASSA_TOOLS_CLI_COMPARISON_H_
#define IASSA_TOOLS_CLI_COMPARISON_H_

#include <cstdint>
#include <string>
#include <vector>

#include "iassa/engine.h"
#include "iassa/metrics.h"
#include "iassa/synthetic.h"

namespace iassa::cli {

// The synthetic suite: seeded scenes with one bright target each, scored by
// a region scorer that only sees the target.
struct ComparisonOptions {
  int scenes = 20;
  uint64_t seed = 2024;
  SceneOptions scene;
  int max_iters = 10;
  double lambda_reg = 0.5;
  double t_thresh = 0.3;
  int threads = 1;
  RiseOptions rise;
};

// Engine configuration used for every scene of the suite: the default
// hyperparameters scaled to the scene side.
ExplainConfig SuiteConfig(const ComparisonOptions& options);

struct MethodSummary {
  std::string method;
  std::vector<EvalReport> per_scene;
  // Means over scenes.
  MetricValues image_level;
  MetricValues pixel_level;
  int pointing_hits = 0;
};

struct Comparison {
  // iassa, rise, occlusion.
  std::vector<MethodSummary> methods;

  // One row per method, five image-level then five pixel-level columns.
  std::string ToCsv() const;
  const MethodSummary& Get(const std::string& method) const;
};

Comparison RunComparison(const ComparisonOptions& options);

}  // namespace iassa::cli

#endif  // IASSA_TOOLS_CLI_COMPARISON_H_
