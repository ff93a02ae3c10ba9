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
#include <charconv>
#include <numeric>
#include <string>

#include "iassa/error.h"

namespace iassa {
namespace {

constexpr double kHighActivation = 0.7;
constexpr int kReferenceSide = 224;
constexpr double kReferenceBlurSigma = 10.0;

void CheckSameShape(const ImageTensor& image, const SaliencyMap& s) {
  if (image.height() != s.height() || image.width() != s.width()) {
    throw ArgumentError("saliency map and image dimensions differ");
  }
}

void CheckSameShape(const SaliencyMap& s, const RegionMask& gt) {
  if (s.height() != gt.height() || s.width() != gt.width()) {
    throw ArgumentError("saliency map and ground truth dimensions differ");
  }
}

size_t StepPixels(const ImageTensor& image, const CurveOptions& options) {
  if (options.step_px > 0) return options.step_px;
  return std::max<size_t>(1, image.pixel_count() / 100);
}

void AppendNumber(std::string& out, double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  out.append(buf, res.ptr);
}

// Scores `start` with the first min(i * step, HW) ranked pixels taken from
// `source`, for i = 0 .. ceil(HW / step).
Curve SweepCurve(ScoringOracle& scorer, const ImageTensor& start,
                 const ImageTensor& source, const SaliencyMap& s, int cls,
                 size_t step, const BatchOptions& batch) {
  if (cls < 0 || cls >= scorer.class_count()) {
    throw ArgumentError("class " + std::to_string(cls) + " is out of range");
  }
  const std::vector<size_t> order = RankPixels(s);
  const size_t hw = order.size();
  const size_t points = (hw + step - 1) / step + 1;
  const int channels = start.channels();

  const ScoreMatrix scores = ScoreBatched(
      scorer, points,
      [&](size_t i) {
        ImageTensor canvas = start;
        std::span<float> dst = canvas.mutable_data();
        std::span<const float> src = source.data();
        const size_t n = std::min(hw, i * step);
        for (size_t j = 0; j < n; ++j) {
          const size_t base = order[j] * channels;
          for (int c = 0; c < channels; ++c) dst[base + c] = src[base + c];
        }
        return canvas;
      },
      batch);

  Curve curve;
  curve.fractions.resize(points);
  curve.scores.resize(points);
  for (size_t i = 0; i < points; ++i) {
    curve.fractions[i] = static_cast<double>(std::min(hw, i * step)) /
                         static_cast<double>(hw);
    curve.scores[i] = scores.at(i, cls);
  }
  curve.auc = Auc(curve.fractions, curve.scores);
  return curve;
}

}  // namespace

std::string Curve::ToCsv() const {
  std::string out = "fraction,score\n";
  for (size_t i = 0; i < fractions.size(); ++i) {
    AppendNumber(out, fractions[i]);
    out.push_back(',');
    AppendNumber(out, scores[i]);
    out.push_back('\n');
  }
  return out;
}

double Auc(std::span<const double> fractions, std::span<const double> scores) {
  if (fractions.size() != scores.size()) {
    throw ArgumentError("curve fractions and scores differ in length");
  }
  if (fractions.size() < 2) throw ArgumentError("a curve needs at least two points");
  double area = 0.0;
  for (size_t i = 1; i < fractions.size(); ++i) {
    const double dx = fractions[i] - fractions[i - 1];
    if (dx < 0.0) throw ArgumentError("curve fractions must be ascending");
    area += 0.5 * dx * (scores[i] + scores[i - 1]);
  }
  return area;
}

std::vector<size_t> RankPixels(const SaliencyMap& s) {
  std::vector<size_t> order(s.size());
  std::iota(order.begin(), order.end(), size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](size_t a, size_t b) { return s[a] > s[b]; });
  return order;
}

Curve DeletionCurve(ScoringOracle& scorer, const ImageTensor& image,
                    const SaliencyMap& s, int cls, const CurveOptions& options) {
  CheckSameShape(image, s);
  if (!(options.fill >= 0.0f && options.fill <= 1.0f)) {
    throw ArgumentError("deletion fill must lie in [0, 1]");
  }
  const ImageTensor grey(image.height(), image.width(), image.channels(),
                         options.fill);
  return SweepCurve(scorer, image, grey, s, cls, StepPixels(image, options),
                    options.batch);
}

Curve InsertionCurve(ScoringOracle& scorer, const ImageTensor& image,
                     const SaliencyMap& s, int cls, const CurveOptions& options) {
  CheckSameShape(image, s);
  double sigma = options.blur_sigma;
  if (sigma <= 0.0) {
    const int side = std::max(image.height(), image.width());
    sigma = kReferenceBlurSigma * side / kReferenceSide;
  }
  const ImageTensor blurred = GaussianBlur(image, sigma);
  return SweepCurve(scorer, blurred, image, s, cls, StepPixels(image, options),
                    options.batch);
}

F1Iou ComputeF1Iou(const SaliencyMap& s_norm, const RegionMask& gt, double t) {
  CheckSameShape(s_norm, gt);
  if (gt.empty()) throw ArgumentError("ground truth region is empty");
  const RegionMask pred = HarThreshold(s_norm, t);
  if (pred.empty()) return {};
  size_t inter = 0;
  const std::span<const uint8_t> p = pred.bits();
  const std::span<const uint8_t> g = gt.bits();
  for (size_t i = 0; i < p.size(); ++i) inter += (p[i] & g[i]);
  const double both = static_cast<double>(inter);
  const double uni = static_cast<double>(pred.count() + gt.count() - inter);
  return {2.0 * both / static_cast<double>(pred.count() + gt.count()),
          both / uni};
}

bool PointingGame(const SaliencyMap& s, const RegionMask& gt) {
  CheckSameShape(s, gt);
  const PixelIndex top = s.ArgMax();
  return gt.at(top.row, top.col);
}

MetricValues EvalReport::image_level() const {
  return {deletion_auc, insertion_auc, f1, iou, pointing_hit ? 1.0 : 0.0};
}

EvalReport PixelLevel(const EvalReport& report, const SaliencyMap& s_norm) {
  size_t high = 0;
  for (double v : s_norm.values()) high += v >= kHighActivation;
  EvalReport out = report;
  out.pixel_norm_divisor = std::max<size_t>(1, high);
  const double d = static_cast<double>(out.pixel_norm_divisor);
  const MetricValues img = report.image_level();
  out.pixel_level = {img.deletion_auc / d, img.insertion_auc / d, img.f1 / d,
                     img.iou / d, img.pointing / d};
  return out;
}

Evaluation Evaluate(ScoringOracle& scorer, const ImageTensor& image,
                    const SaliencyMap& s, const RegionMask& gt, int cls,
                    const EvalOptions& options) {
  CheckSameShape(image, s);
  CheckSameShape(s, gt);
  const SaliencyMap s_norm = MinMaxNormalize(s);
  Evaluation eval;
  eval.deletion = DeletionCurve(scorer, image, s_norm, cls, options.curve);
  eval.insertion = InsertionCurve(scorer, image, s_norm, cls, options.curve);
  EvalReport report;
  report.deletion_auc = eval.deletion.auc;
  report.insertion_auc = eval.insertion.auc;
  const F1Iou fi = ComputeF1Iou(s_norm, gt, options.t_thresh);
  report.f1 = fi.f1;
  report.iou = fi.iou;
  report.pointing_hit = PointingGame(s_norm, gt);
  eval.report = PixelLevel(report, s_norm);
  return eval;
}

nlohmann::json ReportToJson(const EvalReport& report) {
  const MetricValues& px = report.pixel_level;
  return {
      {"image_level", {{"deletion_auc", report.deletion_auc},
                       {"insertion_auc", report.insertion_auc},
                       {"f1", report.f1},
                       {"iou", report.iou},
                       {"pointing_hit", report.pointing_hit}}},
      {"pixel_norm_divisor", report.pixel_norm_divisor},
      {"pixel_level", {{"deletion_auc", px.deletion_auc},
                       {"insertion_auc", px.insertion_auc},
                       {"f1", px.f1},
                       {"iou", px.iou},
                       {"pointing", px.pointing}}},
  };
}

}  // namespace iassa
