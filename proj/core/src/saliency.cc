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

#include "iassa/saliency.h"

#include <cmath>
#include <string>

#include "iassa/error.h"
#include "iassa/parallel.h"

namespace iassa {
namespace {

void CheckAggregateInputs(const MaskSet& masks, const ScoreMatrix& scores,
                          int cls) {
  if (masks.empty()) throw ArgumentError("cannot aggregate an empty mask set");
  if (scores.rows() != masks.size()) {
    throw ArgumentError("score rows (" + std::to_string(scores.rows()) +
                        ") do not match mask count (" +
                        std::to_string(masks.size()) + ")");
  }
  if (cls < 0 || cls >= scores.cols()) {
    throw ArgumentError("class index " + std::to_string(cls) +
                        " is outside the score vector");
  }
}

// Per-pixel Neumaier sums of (score - shift) over the masks covering each
// pixel, accumulated in mask order. Rows are partitioned across threads.
std::vector<double> WeightedSums(const MaskSet& masks,
                                 const ScoreMatrix& scores, int cls,
                                 double shift, int threads) {
  const int h = masks.height();
  const int w = masks.width();
  std::vector<double> sum(static_cast<size_t>(h) * w, 0.0);
  std::vector<double> comp(sum.size(), 0.0);
  ParallelFor(static_cast<size_t>(h), threads, [&](size_t row_begin,
                                                    size_t row_end) {
    const int lo = static_cast<int>(row_begin);
    const int hi = static_cast<int>(row_end);
    for (size_t i = 0; i < masks.size(); ++i) {
      const double score = scores.at(i, cls) - shift;
      const Mask& mask = masks[i];
      if (const auto& win = mask.window();
          win && (win->top >= hi || win->top + win->size <= lo)) {
        continue;
      }
      mask.ForEachRun([&](int r, int begin, int end) {
        if (r < lo || r >= hi) return;
        const size_t base = static_cast<size_t>(r) * w;
        for (int c = begin; c < end; ++c) {
          double& s = sum[base + c];
          const double t = s + score;
          comp[base + c] +=
              std::abs(s) >= std::abs(score) ? (s - t) + score : (score - t) + s;
          s = t;
        }
      });
    }
  });
  for (size_t p = 0; p < sum.size(); ++p) sum[p] += comp[p];
  return sum;
}

}  // namespace

ScoreMatrix::ScoreMatrix(size_t rows, int cols)
    : rows_(rows), cols_(cols), values_(rows * static_cast<size_t>(cols), 0.0) {
  if (cols < 1) throw ArgumentError("score matrix needs at least one class");
}

ScoreMatrix::ScoreMatrix(const std::vector<std::vector<double>>& rows)
    : rows_(rows.size()), cols_(rows.empty() ? 0 : static_cast<int>(rows[0].size())) {
  values_.reserve(rows_ * static_cast<size_t>(cols_));
  for (size_t i = 0; i < rows.size(); ++i) {
    if (static_cast<int>(rows[i].size()) != cols_) {
      throw ArgumentError("score row " + std::to_string(i) +
                          " has a different length");
    }
    for (double v : rows[i]) {
      if (!std::isfinite(v)) {
        throw NumericError("non-finite score for mask " + std::to_string(i));
      }
      values_.push_back(v);
    }
  }
}

ImageTensor MaskedImage(const ImageTensor& image, const Mask& mask,
                        float fill) {
  if (mask.height() != image.height() || mask.width() != image.width()) {
    throw ArgumentError("mask dimensions do not match the image");
  }
  if (!(fill >= 0.0f && fill <= 1.0f)) throw ArgumentError("fill must lie in [0, 1]");
  const int ch = image.channels();
  const auto src = image.data();
  std::vector<float> out(src.size(), fill);
  mask.ForEachRun([&](int r, int begin, int end) {
    const size_t from = image.Offset(r, begin, 0);
    const size_t to = image.Offset(r, end - 1, ch - 1) + 1;
    std::copy(src.begin() + static_cast<ptrdiff_t>(from),
              src.begin() + static_cast<ptrdiff_t>(to),
              out.begin() + static_cast<ptrdiff_t>(from));
  });
  return ImageTensor(image.height(), image.width(), ch, std::move(out));
}

SaliencyMap Aggregate(const MaskSet& masks, const ScoreMatrix& scores, int cls,
                      int threads) {
  CheckAggregateInputs(masks, scores, cls);
  // Averaging deviations from one reference score keeps a constant score
  // vector exactly constant in the output.
  const double reference = scores.at(0, cls);
  std::vector<double> sum = WeightedSums(masks, scores, cls, reference, threads);
  const auto coverage = masks.coverage();
  for (size_t p = 0; p < sum.size(); ++p) {
    sum[p] = coverage[p] > 0 ? reference + sum[p] / coverage[p] : 0.0;
  }
  return SaliencyMap(masks.height(), masks.width(), std::move(sum));
}

SaliencyMap AggregateRise(const MaskSet& masks, const ScoreMatrix& scores,
                          int cls, double keep_probability, int threads) {
  CheckAggregateInputs(masks, scores, cls);
  if (!(keep_probability > 0.0 && keep_probability <= 1.0)) {
    throw ArgumentError("keep probability must lie in (0, 1]");
  }
  std::vector<double> sum = WeightedSums(masks, scores, cls, 0.0, threads);
  const double divisor = keep_probability * static_cast<double>(masks.size());
  for (double& v : sum) v /= divisor;
  return SaliencyMap(masks.height(), masks.width(), std::move(sum));
}

SaliencyMap MergeCarryForward(const SaliencyMap& prev,
                              const SaliencyMap& fresh,
                              std::span<const int32_t> coverage) {
  if (prev.height() != fresh.height() || prev.width() != fresh.width() ||
      coverage.size() != prev.size()) {
    throw ArgumentError("carry-forward inputs have different dimensions");
  }
  SaliencyMap out = prev;
  for (size_t p = 0; p < coverage.size(); ++p) {
    if (coverage[p] > 0) out[p] = fresh[p];
  }
  return out;
}

}  // namespace iassa
