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

#include "iassa/engine.h"

#include <algorithm>
#include <cmath>
#include <string>

#include "iassa/error.h"
#include "iassa/saliency.h"

namespace iassa {
namespace {

constexpr int kReferenceSide = 224;

double MeanAbsDelta(const SaliencyMap& a, const SaliencyMap& b) {
  double acc = 0.0;
  for (size_t i = 0; i < a.size(); ++i) acc += std::abs(a[i] - b[i]);
  return acc / static_cast<double>(a.size());
}

double MeanAbs(const SaliencyMap& a) {
  double acc = 0.0;
  for (double v : a.values()) acc += std::abs(v);
  return acc / static_cast<double>(a.size());
}

void CheckInput(const ImageTensor& image, const ExplainConfig& cfg) {
  cfg.Validate();
  if (image.height() != cfg.input_side || image.width() != cfg.input_side) {
    throw ArgumentError("image is " + std::to_string(image.height()) + "x" +
                        std::to_string(image.width()) + " but the engine expects " +
                        std::to_string(cfg.input_side) + "x" +
                        std::to_string(cfg.input_side));
  }
}

int ResolveClass(ScoringOracle& scorer, const ImageTensor& image,
                 const ExplainConfig& cfg, size_t& setup_calls) {
  int cls = 0;
  if (cfg.target_class) {
    cls = *cfg.target_class;
  } else {
    cls = TopClass(scorer, image);
    ++setup_calls;
  }
  if (cls < 0 || cls >= scorer.class_count()) {
    throw ArgumentError("target class " + std::to_string(cls) +
                        " is outside the oracle's " +
                        std::to_string(scorer.class_count()) + " classes");
  }
  return cls;
}

ScoreMatrix ScoreMasks(ScoringOracle& scorer, const ImageTensor& image,
                       const MaskSet& masks, const ExplainConfig& cfg) {
  return ScoreBatched(
      scorer, masks.size(),
      [&](size_t i) { return MaskedImage(image, masks[i], cfg.fill); },
      BatchOptions{cfg.batch_size, cfg.threads});
}

}  // namespace

void ExplainConfig::Validate() const {
  if (input_side < 1) throw ArgumentError("input_side must be positive");
  schedule.Validate();
  if (schedule.w0 > input_side) {
    throw ArgumentError("initial window " + std::to_string(schedule.w0) +
                        " exceeds the input side " + std::to_string(input_side));
  }
  if (!(lambda_reg >= 0.0 && lambda_reg <= 1.0)) {
    throw ArgumentError("lambda_reg must lie in [0, 1]");
  }
  if (!(t_thresh >= 0.0 && t_thresh < 1.0)) {
    throw ArgumentError("t_thresh must lie in [0, 1)");
  }
  if (max_iters < 1) throw ArgumentError("max_iters must be at least 1");
  if (!(epsilon_conv > 0.0)) throw ArgumentError("epsilon_conv must be positive");
  if (!(overlap_frac > 0.0 && overlap_frac <= 1.0)) {
    throw ArgumentError("overlap_frac must lie in (0, 1]");
  }
  if (!(fill >= 0.0f && fill <= 1.0f)) throw ArgumentError("fill must lie in [0, 1]");
  if (batch_size < 1) throw ArgumentError("batch_size must be positive");
  if (threads < 1) throw ArgumentError("threads must be positive");
  if (rise.grid_n < 1 || rise.mask_count < 1 ||
      !(rise.keep_probability > 0.0 && rise.keep_probability < 1.0)) {
    throw ArgumentError("invalid RISE options");
  }
}

ExplainConfig ExplainConfig::ScaledTo(int side) const {
  if (side < 1) throw ArgumentError("side must be positive");
  ExplainConfig out = *this;
  const double f = static_cast<double>(side) / kReferenceSide;
  out.input_side = side;
  out.schedule.w0 = std::max(schedule.w_min,
                             static_cast<int>(std::lround(schedule.w0 * f)));
  out.schedule.s0 = std::max(schedule.s_min,
                             static_cast<int>(std::lround(schedule.s0 * f)));
  out.schedule.w_step = schedule.w_step * f;
  out.schedule.s_step = schedule.s_step * f;
  return out;
}

size_t ExplanationResult::TotalOracleCalls() const {
  size_t total = setup_oracle_calls;
  for (const IterationStats& it : per_iteration) total += it.oracle_calls;
  return total;
}

int TopClass(ScoringOracle& scorer, const ImageTensor& image) {
  const ScoreMatrix scores =
      ScoreBatched(scorer, 1, [&](size_t) { return image; });
  int best = 0;
  for (int k = 1; k < scores.cols(); ++k) {
    if (scores.at(0, k) > scores.at(0, best)) best = k;
  }
  return best;
}

ExplanationResult Explain(const ImageTensor& image, ScoringOracle& scorer,
                          FeatureProvider& features, const ExplainConfig& cfg,
                          const IterationCallback& on_iteration) {
  CheckInput(image, cfg);
  const int side = cfg.input_side;
  ExplanationResult result;
  result.method = "iassa";

  try {
    // Features do not change across iterations: one operator per image.
    const AttentionOperator attention = AffinityAttention(
        FuseFeatures(features.Features(image), cfg.fuse), cfg.threads);
    result.target_class = ResolveClass(scorer, image, cfg, result.setup_oracle_calls);
    const int cls = result.target_class;

    WindowStride ws = ScheduleAt(cfg.schedule, 0);
    MaskSet masks = SlidingWindowMasks(side, side, ws.window, ws.stride);
    SaliencyMap sampled = Aggregate(masks, ScoreMasks(scorer, image, masks, cfg),
                                    cls, cfg.threads);
    SaliencyMap sampled_norm = MinMaxNormalize(sampled);
    result.per_iteration.push_back({0, ws.window, ws.stride, masks.size(),
                                    masks.size(), MeanAbs(sampled_norm)});
    if (on_iteration) on_iteration(result.per_iteration.back());

    SaliencyMap adjusted;
    for (int k = 0;; ++k) {
      adjusted = AdjustSaliency(sampled, ApplyAttention(attention, sampled),
                                cfg.lambda_reg, cfg.adjust_mode);
      if (result.converged_at || k + 1 >= cfg.max_iters) break;

      const RegionMask har = HarThreshold(MinMaxNormalize(adjusted), cfg.t_thresh);
      ws = ScheduleAt(cfg.schedule, k + 1);
      masks = AdaptiveWindowMasks(har, ws.window, ws.stride, cfg.overlap_frac);
      const SaliencyMap fresh = Aggregate(
          masks, ScoreMasks(scorer, image, masks, cfg), cls, cfg.threads);
      sampled = MergeCarryForward(adjusted, fresh, masks.coverage());

      SaliencyMap next_norm = MinMaxNormalize(sampled);
      const double delta = MeanAbsDelta(next_norm, sampled_norm);
      sampled_norm = std::move(next_norm);
      result.per_iteration.push_back(
          {k + 1, ws.window, ws.stride, masks.size(), masks.size(), delta});
      if (on_iteration) on_iteration(result.per_iteration.back());
      if (delta < cfg.epsilon_conv) result.converged_at = k + 1;
    }
    result.final_map = MinMaxNormalize(adjusted);
    if (cfg.emit_raw) result.raw_map = sampled;
  } catch (const ExplainAborted&) {
    throw;
  } catch (const OracleError& e) {
    throw ExplainAborted(e.what(), result.per_iteration);
  }
  return result;
}

ExplanationResult ExplainOcclusion(const ImageTensor& image,
                                   ScoringOracle& scorer,
                                   const ExplainConfig& cfg) {
  CheckInput(image, cfg);
  ExplanationResult result;
  result.method = "occlusion";
  try {
    result.target_class = ResolveClass(scorer, image, cfg, result.setup_oracle_calls);
    const WindowStride ws = ScheduleAt(cfg.schedule, 0);
    const MaskSet masks =
        SlidingWindowMasks(cfg.input_side, cfg.input_side, ws.window, ws.stride);
    const SaliencyMap sampled =
        Aggregate(masks, ScoreMasks(scorer, image, masks, cfg),
                  result.target_class, cfg.threads);
    result.final_map = MinMaxNormalize(sampled);
    result.per_iteration.push_back({0, ws.window, ws.stride, masks.size(),
                                    masks.size(), MeanAbs(result.final_map)});
    if (cfg.emit_raw) result.raw_map = sampled;
  } catch (const OracleError& e) {
    throw ExplainAborted(e.what(), result.per_iteration);
  }
  return result;
}

ExplanationResult ExplainRiseBaseline(const ImageTensor& image,
                                      ScoringOracle& scorer,
                                      const ExplainConfig& cfg) {
  CheckInput(image, cfg);
  ExplanationResult result;
  result.method = "rise";
  try {
    result.target_class = ResolveClass(scorer, image, cfg, result.setup_oracle_calls);
    const MaskSet masks =
        RandomRiseMasks(cfg.input_side, cfg.input_side, cfg.rise.grid_n,
                        cfg.rise.keep_probability, cfg.rise.mask_count, cfg.seed);
    const SaliencyMap sampled =
        AggregateRise(masks, ScoreMasks(scorer, image, masks, cfg),
                      result.target_class, cfg.rise.keep_probability, cfg.threads);
    result.final_map = MinMaxNormalize(sampled);
    result.per_iteration.push_back(
        {0, 0, 0, masks.size(), masks.size(), MeanAbs(result.final_map)});
    if (cfg.emit_raw) result.raw_map = sampled;
  } catch (const OracleError& e) {
    throw ExplainAborted(e.what(), result.per_iteration);
  }
  return result;
}

nlohmann::json ConfigToJson(const ExplainConfig& cfg) {
  nlohmann::json doc = {
      {"input_side", cfg.input_side},
      {"w0", cfg.schedule.w0},
      {"s0", cfg.schedule.s0},
      {"w_step", cfg.schedule.w_step},
      {"s_step", cfg.schedule.s_step},
      {"w_min", cfg.schedule.w_min},
      {"s_min", cfg.schedule.s_min},
      {"lambda_reg", cfg.lambda_reg},
      {"t_thresh", cfg.t_thresh},
      {"max_iters", cfg.max_iters},
      {"epsilon_conv", cfg.epsilon_conv},
      {"overlap_frac", cfg.overlap_frac},
      {"adjust_mode", AdjustModeName(cfg.adjust_mode)},
      {"seed", cfg.seed},
      {"fill", cfg.fill},
      {"batch_size", cfg.batch_size},
      {"l2_normalize_features", cfg.fuse.l2_normalize},
      {"feature_max_side", cfg.fuse.max_side},
      {"rise", {{"grid_n", cfg.rise.grid_n},
                {"keep_probability", cfg.rise.keep_probability},
                {"mask_count", cfg.rise.mask_count}}},
  };
  doc["target_class"] = cfg.target_class ? nlohmann::json(*cfg.target_class)
                                         : nlohmann::json("top1");
  return doc;
}

nlohmann::json ResultToJson(const ExplanationResult& result) {
  nlohmann::json iterations = nlohmann::json::array();
  for (const IterationStats& it : result.per_iteration) {
    iterations.push_back({{"k", it.k},
                          {"window", it.window},
                          {"stride", it.stride},
                          {"mask_count", it.mask_count},
                          {"oracle_calls", it.oracle_calls},
                          {"mean_abs_delta", it.mean_abs_delta}});
  }
  return {
      {"method", result.method},
      {"target_class", result.target_class},
      {"converged_at", result.converged_at ? nlohmann::json(*result.converged_at)
                                           : nlohmann::json(nullptr)},
      {"budget_exhausted", !result.converged_at.has_value()},
      {"setup_oracle_calls", result.setup_oracle_calls},
      {"total_oracle_calls", result.TotalOracleCalls()},
      {"final_map", {{"height", result.final_map.height()},
                     {"width", result.final_map.width()},
                     {"normalized", true}}},
      {"per_iteration", iterations},
  };
}

}  // namespace iassa
