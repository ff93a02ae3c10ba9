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

#include "iassa/metrics.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include "iassa/error.h"
#include "iassa/grid.h"
#include "iassa/oracle.h"
#include "iassa/rng.h"
#include "test_support.h"

namespace iassa {
namespace {

using testing::RandomImage;
using testing::RandomMap;
using testing::RandomRegion;

double ScoreOf(ScoringOracle& scorer, const ImageTensor& image, int cls = 0) {
  return scorer.Score(std::span<const ImageTensor>(&image, 1)).at(0).at(cls);
}

// Ranking by a direct selection rule: highest value first, lowest index on
// ties.
std::vector<size_t> RankOracle(const SaliencyMap& s) {
  std::vector<size_t> order;
  std::vector<bool> used(s.size(), false);
  for (size_t n = 0; n < s.size(); ++n) {
    size_t best = s.size();
    for (size_t i = 0; i < s.size(); ++i) {
      if (!used[i] && (best == s.size() || s[i] > s[best])) best = i;
    }
    used[best] = true;
    order.push_back(best);
  }
  return order;
}

double ChannelMeanAt(const ImageTensor& image, size_t p) {
  double acc = 0.0;
  for (int k = 0; k < image.channels(); ++k) acc += image.data()[p * image.channels() + k];
  return acc / image.channels();
}

TEST(AucTest, Examples) {
  EXPECT_DOUBLE_EQ(Auc(std::vector<double>{0, 1}, std::vector<double>{1, 1}), 1.0);
  EXPECT_DOUBLE_EQ(Auc(std::vector<double>{0, 1}, std::vector<double>{0, 1}), 0.5);
  EXPECT_DOUBLE_EQ(Auc(std::vector<double>{0, 0.5, 1}, std::vector<double>{1, 0.5, 0}), 0.5);
}

TEST(AucTest, RejectsBadCurves) {
  EXPECT_THROW(Auc(std::vector<double>{0}, std::vector<double>{1}), ArgumentError);
  EXPECT_THROW(Auc(std::vector<double>{0, 1}, std::vector<double>{1}), ArgumentError);
  EXPECT_THROW(Auc(std::vector<double>{0, 1, 0.5}, std::vector<double>{1, 1, 1}),
               ArgumentError);
}

TEST(RankPixelsTest, MatchesSelectionOracle) {
  Rng rng(1);
  for (int trial = 0; trial < 30; ++trial) {
    SaliencyMap s = RandomMap(trial, 5, 7);
    // Force ties.
    for (double& v : s.mutable_values()) v = std::round(v * 4) / 4;
    EXPECT_EQ(RankPixels(s), RankOracle(s));
  }
}

TEST(DeletionCurveTest, ConstantScorerGivesConstantAuc) {
  ConstantScorer scorer(0.37);
  const ImageTensor image = RandomImage(1, 16, 16, 3);
  const Curve curve = DeletionCurve(scorer, image, RandomMap(2, 16, 16), 0);
  EXPECT_NEAR(curve.auc, 0.37, 1e-12);
  const Curve insertion = InsertionCurve(scorer, image, RandomMap(2, 16, 16), 0);
  EXPECT_NEAR(insertion.auc, 0.37, 1e-12);
}

TEST(DeletionCurveTest, FractionsCoverUnitInterval) {
  ConstantScorer scorer(1.0);
  const ImageTensor image = RandomImage(3, 15, 15, 1);
  const Curve curve = DeletionCurve(scorer, image, RandomMap(4, 15, 15), 0);
  // 225 pixels, step 2: ceil(225 / 2) + 1 points.
  ASSERT_EQ(curve.fractions.size(), 114u);
  EXPECT_EQ(curve.fractions.front(), 0.0);
  EXPECT_EQ(curve.fractions.back(), 1.0);
  EXPECT_TRUE(std::is_sorted(curve.fractions.begin(), curve.fractions.end()));
  EXPECT_NEAR(Auc(curve.fractions, curve.scores), curve.auc, 1e-9);
}

TEST(DeletionCurveTest, SingleStepIsOneTrapezoid) {
  const SaliencyMap weights = RandomMap(5, 8, 8, 0.1, 1.0);
  LinearProbeScorer scorer(weights);
  const ImageTensor image = RandomImage(6, 8, 8, 3);
  CurveOptions options;
  options.step_px = 64;
  const Curve curve = DeletionCurve(scorer, image, weights, 0, options);
  ASSERT_EQ(curve.scores.size(), 2u);
  const double full = ScoreOf(scorer, image);
  const double grey = ScoreOf(scorer, ImageTensor(8, 8, 3, 0.5f));
  EXPECT_EQ(curve.scores[0], full);
  EXPECT_EQ(curve.scores[1], grey);
  EXPECT_NEAR(curve.auc, (full + grey) / 2, 1e-15);
}

TEST(DeletionCurveTest, LinearScorerFollowsPartialSums) {
  const SaliencyMap weights = RandomMap(7, 12, 12, 0.1, 1.0);
  LinearProbeScorer scorer(weights);
  const ImageTensor image = RandomImage(8, 12, 12, 3);
  CurveOptions options;
  options.fill = 0.0f;
  options.step_px = 5;
  const Curve curve = DeletionCurve(scorer, image, weights, 0, options);

  const std::vector<size_t> order = RankOracle(weights);
  double remaining = 0.0;
  for (size_t p = 0; p < 144; ++p) remaining += weights[p] * ChannelMeanAt(image, p);
  const double full = remaining;
  size_t removed = 0;
  for (size_t i = 0; i < curve.scores.size(); ++i) {
    const size_t target = std::min<size_t>(144, i * 5);
    for (; removed < target; ++removed) {
      remaining -= weights[order[removed]] * ChannelMeanAt(image, order[removed]);
    }
    EXPECT_NEAR(curve.scores[i], remaining, 1e-9);
    if (i > 0) {
      EXPECT_LT(curve.scores[i], curve.scores[i - 1]);
    }
  }
  EXPECT_LT(curve.auc, full);
}

TEST(InsertionCurveTest, EndpointsAreDirectScores) {
  const SaliencyMap weights = RandomMap(9, 20, 20, -1, 1);
  LinearProbeScorer scorer(weights);
  const ImageTensor image = RandomImage(10, 20, 20, 3);
  CurveOptions options;
  options.blur_sigma = 3.0;
  const Curve curve = InsertionCurve(scorer, image, RandomMap(11, 20, 20), 0, options);
  EXPECT_EQ(curve.scores.front(), ScoreOf(scorer, GaussianBlur(image, 3.0)));
  EXPECT_EQ(curve.scores.back(), ScoreOf(scorer, image));
  const Curve deletion = DeletionCurve(scorer, image, RandomMap(11, 20, 20), 0);
  EXPECT_EQ(deletion.scores.front(), ScoreOf(scorer, image));
  EXPECT_EQ(deletion.scores.back(), ScoreOf(scorer, ImageTensor(20, 20, 3, 0.5f)));
}

TEST(InsertionCurveTest, DefaultBlurScalesWithSide) {
  const SaliencyMap weights = RandomMap(12, 32, 32, -1, 1);
  LinearProbeScorer scorer(weights);
  const ImageTensor image = RandomImage(13, 32, 32, 3);
  const Curve curve = InsertionCurve(scorer, image, RandomMap(14, 32, 32), 0);
  EXPECT_EQ(curve.scores.front(), ScoreOf(scorer, GaussianBlur(image, 10.0 * 32 / 224)));
}

TEST(InsertionCurveTest, ConstantSaliencyRevealsRowMajor) {
  const SaliencyMap weights = RandomMap(15, 6, 6, -1, 1);
  LinearProbeScorer scorer(weights);
  const ImageTensor image = RandomImage(16, 6, 6, 1);
  CurveOptions options;
  options.step_px = 1;
  options.blur_sigma = 2.0;
  const Curve curve = InsertionCurve(scorer, image, SaliencyMap(6, 6, 0.5), 0, options);
  const ImageTensor blurred = GaussianBlur(image, 2.0);
  ImageTensor canvas = blurred;
  for (size_t i = 0; i < 36; ++i) {
    canvas.mutable_data()[i] = image.data()[i];
    EXPECT_EQ(curve.scores[i + 1], ScoreOf(scorer, canvas));
  }
}

TEST(InsertionCurveTest, RevealingPositiveContributionsIncreases) {
  constexpr int kSide = 12;
  constexpr double kSigma = 2.0;
  const ImageTensor image = RandomImage(17, kSide, kSide, 3);
  const ImageTensor blurred = GaussianBlur(image, kSigma);
  // Weights aligned with (original - blurred) make every reveal add
  // (original - blurred)^2 > 0.
  SaliencyMap weights(kSide, kSide);
  SaliencyMap gain(kSide, kSide);
  for (size_t p = 0; p < weights.size(); ++p) {
    const double d = ChannelMeanAt(image, p) - ChannelMeanAt(blurred, p);
    weights.mutable_values()[p] = d;
    gain.mutable_values()[p] = std::abs(d);
  }
  LinearProbeScorer scorer(weights);
  CurveOptions options;
  options.blur_sigma = kSigma;
  options.step_px = 3;
  const Curve curve = InsertionCurve(scorer, image, gain, 0, options);
  for (size_t i = 1; i < curve.scores.size(); ++i) {
    EXPECT_GT(curve.scores[i], curve.scores[i - 1]);
  }
  SaliencyMap reversed = gain;
  for (double& v : reversed.mutable_values()) v = -v;
  const Curve worse = InsertionCurve(scorer, image, reversed, 0, options);
  EXPECT_GT(curve.auc, worse.auc);
}

TEST(CurveTest, CsvHasHeaderAndShortestNumbers) {
  Curve c;
  c.fractions = {0.0, 0.5, 1.0};
  c.scores = {1.0, 0.25, 0.1};
  EXPECT_EQ(c.ToCsv(), "fraction,score\n0,1\n0.5,0.25\n1,0.1\n");
}

TEST(CurveTest, RejectsBadArguments) {
  ConstantScorer scorer(1.0, 2);
  const ImageTensor image = RandomImage(1, 4, 4, 1);
  EXPECT_THROW(DeletionCurve(scorer, image, RandomMap(1, 4, 5), 0), ArgumentError);
  EXPECT_THROW(DeletionCurve(scorer, image, RandomMap(1, 4, 4), 2), ArgumentError);
}

TEST(F1IouTest, Examples) {
  const SaliencyMap s(2, 2, std::vector<double>{1.0, 1.0, 0.0, 0.0});
  const F1Iou same = ComputeF1Iou(s, RegionMask(2, 2, {1, 1, 0, 0}));
  EXPECT_EQ(same.f1, 1.0);
  EXPECT_EQ(same.iou, 1.0);
  const F1Iou disjoint = ComputeF1Iou(s, RegionMask(2, 2, {0, 0, 1, 1}));
  EXPECT_EQ(disjoint.f1, 0.0);
  EXPECT_EQ(disjoint.iou, 0.0);
  const SaliencyMap half(2, 2, std::vector<double>{1.0, 0.0, 0.0, 0.0});
  const F1Iou sub = ComputeF1Iou(half, RegionMask(2, 2, {1, 1, 0, 0}));
  EXPECT_DOUBLE_EQ(sub.iou, 0.5);
  EXPECT_DOUBLE_EQ(sub.f1, 2.0 / 3.0);
  const F1Iou empty = ComputeF1Iou(SaliencyMap(2, 2), RegionMask(2, 2, {1, 0, 0, 0}));
  EXPECT_EQ(empty.f1, 0.0);
  EXPECT_EQ(empty.iou, 0.0);
  EXPECT_THROW(ComputeF1Iou(s, RegionMask(2, 2)), ArgumentError);
  EXPECT_THROW(ComputeF1Iou(s, RegionMask(3, 2, {1, 0, 0, 0, 0, 0})), ArgumentError);
}

TEST(F1IouTest, IdentityOnRandomPairs) {
  Rng rng(20);
  for (int trial = 0; trial < 1000; ++trial) {
    const int h = 1 + int(rng.Below(12));
    const int w = 1 + int(rng.Below(12));
    const SaliencyMap s = RandomMap(1000 + trial, h, w);
    RegionMask gt = RandomRegion(5000 + trial, h, w, rng.Uniform(0.05, 0.9));
    if (gt.empty()) gt.set(0, 0, true);
    const F1Iou m = ComputeF1Iou(s, gt, rng.Uniform(0, 0.95));
    EXPECT_NEAR(m.f1, 2 * m.iou / (1 + m.iou), 1e-9);
  }
}

TEST(F1IouTest, RaisingThresholdNeverGrowsPrediction) {
  const SaliencyMap s = RandomMap(21, 10, 10);
  size_t previous = s.size() + 1;
  for (double t = 0.0; t < 1.0; t += 0.05) {
    const size_t n = HarThreshold(s, t).count();
    EXPECT_LE(n, previous);
    previous = n;
  }
}

TEST(PointingGameTest, Examples) {
  EXPECT_TRUE(PointingGame(RandomMap(22, 5, 5), RegionMask(5, 5, std::vector<uint8_t>(25, 1))));
  SaliencyMap peak(5, 5, 0.1);
  peak.at(2, 2) = 0.9;
  RegionMask around(5, 5);
  around.set(2, 2, true);
  around.set(2, 3, true);
  EXPECT_TRUE(PointingGame(peak, around));
  RegionMask all_but_origin(5, 5, std::vector<uint8_t>(25, 1));
  all_but_origin.set(0, 0, false);
  EXPECT_FALSE(PointingGame(SaliencyMap(5, 5, 0.4), all_but_origin));
}

TEST(PixelLevelTest, Examples) {
  EvalReport report;
  report.deletion_auc = 0.2;
  report.insertion_auc = 0.6;
  report.f1 = 0.5;
  report.iou = 1.0 / 3.0;
  report.pointing_hit = true;

  SaliencyMap one(10, 10, 0.0);
  one.at(3, 3) = 1.0;
  const EvalReport a = PixelLevel(report, one);
  EXPECT_EQ(a.pixel_norm_divisor, 1u);
  EXPECT_EQ(a.pixel_level.f1, 0.5);
  EXPECT_EQ(a.pixel_level.pointing, 1.0);

  SaliencyMap hundred(20, 20, 0.2);
  for (int i = 0; i < 100; ++i) hundred.mutable_values()[i * 4] = i % 2 ? 0.7 : 1.0;
  const EvalReport b = PixelLevel(report, hundred);
  EXPECT_EQ(b.pixel_norm_divisor, 100u);
  EXPECT_DOUBLE_EQ(b.pixel_level.f1, 0.005);
  EXPECT_DOUBLE_EQ(b.pixel_level.pointing, 0.01);
  EXPECT_DOUBLE_EQ(b.pixel_level.deletion_auc, 0.002);

  EXPECT_EQ(PixelLevel(report, SaliencyMap(4, 4, 0.0)).pixel_norm_divisor, 1u);
}

TEST(EvaluateTest, CombinesMetricsOnNormalizedMap) {
  const SaliencyMap weights = RandomMap(23, 16, 16, 0.1, 1.0);
  LinearProbeScorer scorer(weights);
  const ImageTensor image = RandomImage(24, 16, 16, 3);
  SaliencyMap raw = weights;
  for (double& v : raw.mutable_values()) v = 5.0 + 3.0 * v;
  const RegionMask gt = HarThreshold(MinMaxNormalize(weights), 0.5);
  const Evaluation eval = Evaluate(scorer, image, raw, gt, 0);
  const SaliencyMap norm = MinMaxNormalize(raw);
  EXPECT_EQ(eval.report.deletion_auc, DeletionCurve(scorer, image, norm, 0).auc);
  EXPECT_EQ(eval.report.insertion_auc, InsertionCurve(scorer, image, norm, 0).auc);
  const F1Iou fi = ComputeF1Iou(norm, gt, 0.3);
  EXPECT_EQ(eval.report.f1, fi.f1);
  EXPECT_EQ(eval.report.iou, fi.iou);
  EXPECT_TRUE(eval.report.pointing_hit);
  const nlohmann::json j = ReportToJson(eval.report);
  EXPECT_EQ(j["image_level"]["f1"], fi.f1);
  EXPECT_EQ(j["pixel_norm_divisor"], eval.report.pixel_norm_divisor);
  EXPECT_TRUE(j["pixel_level"].contains("pointing"));
}

TEST(EvaluateTest, OrderingSurvivesEqualDivisors) {
  EvalReport a;
  a.f1 = 0.6;
  EvalReport b;
  b.f1 = 0.4;
  const SaliencyMap s = RandomMap(25, 8, 8);
  EXPECT_GE(PixelLevel(a, s).pixel_level.f1, PixelLevel(b, s).pixel_level.f1);
}

}  // namespace
}  // namespace iassa
