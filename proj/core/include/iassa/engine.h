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

#ifndef IASSA_ENGINE_H_
#define IASSA_ENGINE_H_

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include <nlohmann/json.hpp>

#include "iassa/attention.h"
#include "iassa/error.h"
#include "iassa/grid.h"
#include "iassa/masking.h"
#include "iassa/oracle.h"

namespace iassa {

struct RiseOptions {
  int grid_n = 7;
  double keep_probability = 0.5;
  int mask_count = 4000;
};

struct ExplainConfig {
  // Side of the square input the engine expects.
  int input_side = 224;
  Schedule schedule;
  // Weight of the sampled map against its attention-transformed copy.
  double lambda_reg = 0.5;
  double t_thresh = 0.3;
  int max_iters = 25;
  // Stop once the mean absolute change of consecutive normalized maps drops
  // below this.
  double epsilon_conv = 1e-3;
  double overlap_frac = 0.25;
  AdjustMode adjust_mode = AdjustMode::kConvex;
  // Unset: explain the top-1 class of the unmasked image.
  std::optional<int> target_class;
  uint64_t seed = 0;
  // Value written into occluded pixels; 0 matches the element-wise product.
  float fill = 0.0f;
  size_t batch_size = 256;
  int threads = 1;
  FuseOptions fuse;
  RiseOptions rise;
  // Also return the raw (pre-attention) map of the last iteration.
  bool emit_raw = false;

  void Validate() const;

  // Window, stride and their decrements scaled by side / 224 (rounded, with
  // floors kept), and input_side set to `side`. The default hyperparameters
  // are tuned for 224 x 224 inputs.
  ExplainConfig ScaledTo(int side) const;
};

struct IterationStats {
  int k = 0;
  int window = 0;
  int stride = 0;
  size_t mask_count = 0;
  size_t oracle_calls = 0;
  // Mean |norm(S_k) - norm(S_{k-1})|; for k = 0 the previous map is zero.
  double mean_abs_delta = 0.0;

  friend bool operator==(const IterationStats&,
                         const IterationStats&) = default;
};

struct ExplanationResult {
  // Normalized to [0, 1].
  SaliencyMap final_map;
  // Raw sampled map of the last iteration, when requested.
  std::optional<SaliencyMap> raw_map;
  std::vector<IterationStats> per_iteration;
  int target_class = 0;
  // Iteration at which the convergence test fired; unset when the budget ran
  // out first.
  std::optional<int> converged_at;
  // Calls spent outside the sampling loop (top-1 class selection).
  size_t setup_oracle_calls = 0;
  // "iassa", "rise" or "occlusion".
  std::string method = "iassa";

  size_t TotalOracleCalls() const;
};

// Raised when the oracle fails mid-run; carries the iterations completed so
// far.
class ExplainAborted : public OracleError {
 public:
  ExplainAborted(const std::string& what, std::vector<IterationStats> partial)
      : OracleError(what), partial_(std::move(partial)) {}
  const std::vector<IterationStats>& partial() const { return partial_; }

 private:
  std::vector<IterationStats> partial_;
};

// Iterative adaptive sampling guided by the affinity attention operator.
//
//   A  = AffinityAttention(FuseFeatures(features(image)))
//   S0 = Aggregate(SlidingWindowMasks(w0, s0))
//   for k = 0, 1, ...:
//     S'k  = AdjustSaliency(Sk, ApplyAttention(A, Sk))
//     stop if k + 1 == max_iters
//     R    = HarThreshold(MinMaxNormalize(S'k), t_thresh)
//     Mk+1 = AdaptiveWindowMasks(R, ScheduleAt(k + 1))
//     Sk+1 = MergeCarryForward(S'k, Aggregate(Mk+1), coverage(Mk+1))
//     stop if mean |norm(Sk+1) - norm(Sk)| < epsilon_conv
//   final_map = MinMaxNormalize(S' of the last sampled map)
//
// The image must be input_side x input_side. `on_iteration`, when set, sees
// each entry of per_iteration as soon as it is recorded.
using IterationCallback = std::function<void(const IterationStats&)>;
ExplanationResult Explain(const ImageTensor& image, ScoringOracle& scorer,
                          FeatureProvider& features, const ExplainConfig& cfg,
                          const IterationCallback& on_iteration = nullptr);

// Single pass of sliding-window occlusion with no attention: the
// normalized S0.
ExplanationResult ExplainOcclusion(const ImageTensor& image,
                                   ScoringOracle& scorer,
                                   const ExplainConfig& cfg);

// Single pass of RISE: random masks, weighted sum divided by p N.
ExplanationResult ExplainRiseBaseline(const ImageTensor& image,
                                      ScoringOracle& scorer,
                                      const ExplainConfig& cfg);

// Top-1 class of the unmasked image (ties to the lowest index).
int TopClass(ScoringOracle& scorer, const ImageTensor& image);

nlohmann::json ConfigToJson(const ExplainConfig& cfg);
// Diagnostics only; the map itself is stored separately.
nlohmann::json ResultToJson(const ExplanationResult& result);

}  // namespace iassa

#endif  // IASSA_ENGINE_H_
