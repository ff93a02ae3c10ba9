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

#ifndef IASSA_METRICS_H_
#define IASSA_METRICS_H_

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "iassa/grid.h"
#include "iassa/masking.h"
#include "iassa/oracle.h"

namespace iassa {

struct Curve {
  std::vector<double> fractions;
  std::vector<double> scores;
  double auc = 0.0;

  std::string ToCsv() const;
};

// Trapezoidal area under (fraction, score). Needs at least two points with
// ascending fractions.
double Auc(std::span<const double> fractions, std::span<const double> scores);

struct CurveOptions {
  // Pixels changed per step; 0 means HW / 100 (at least 1).
  size_t step_px = 0;
  // Deletion: value written into removed pixels, all channels.
  float fill = 0.5f;
  // Insertion: blur of the starting canvas; <= 0 means 10 px scaled by
  // side / 224.
  double blur_sigma = 0.0;
  BatchOptions batch;
};

// Pixels ranked by descending saliency, ties by row-major index.
std::vector<size_t> RankPixels(const SaliencyMap& s);

// Greys out pixels in rank order and scores class `cls` after each step.
Curve DeletionCurve(ScoringOracle& scorer, const ImageTensor& image,
                    const SaliencyMap& s, int cls,
                    const CurveOptions& options = {});

// Starts from a blurred canvas and reveals original pixels in rank order.
Curve InsertionCurve(ScoringOracle& scorer, const ImageTensor& image,
                     const SaliencyMap& s, int cls,
                     const CurveOptions& options = {});

struct F1Iou {
  double f1 = 0.0;
  double iou = 0.0;
};

// Thresholds s_norm at t and compares with the ground truth. An empty
// prediction scores (0, 0). Throws ArgumentError for an empty ground truth.
F1Iou ComputeF1Iou(const SaliencyMap& s_norm, const RegionMask& gt,
                   double t = 0.3);

// Whether the maximal pixel (lowest row-major index on ties) lies in gt.
bool PointingGame(const SaliencyMap& s, const RegionMask& gt);

struct MetricValues {
  double deletion_auc = 0.0;
  double insertion_auc = 0.0;
  double f1 = 0.0;
  double iou = 0.0;
  double pointing = 0.0;
};

struct EvalReport {
  double deletion_auc = 0.0;
  double insertion_auc = 0.0;
  double f1 = 0.0;
  double iou = 0.0;
  bool pointing_hit = false;
  size_t pixel_norm_divisor = 1;
  MetricValues pixel_level;

  MetricValues image_level() const;
};

// divisor = max(1, #{l : s_norm(l) >= 0.7}); every image-level value
// (pointing as 0/1) divided by it.
EvalReport PixelLevel(const EvalReport& report, const SaliencyMap& s_norm);

struct EvalOptions {
  double t_thresh = 0.3;
  CurveOptions curve;
};

struct Evaluation {
  EvalReport report;
  Curve deletion;
  Curve insertion;
};

// All five metrics at image and pixel level. The map is min-max normalized
// first.
Evaluation Evaluate(ScoringOracle& scorer, const ImageTensor& image,
                    const SaliencyMap& s, const RegionMask& gt, int cls,
                    const EvalOptions& options = {});

nlohmann::json ReportToJson(const EvalReport& report);

}  // namespace iassa

#endif  // IASSA_METRICS_H_
