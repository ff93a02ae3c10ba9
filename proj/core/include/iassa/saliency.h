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

#ifndef IASSA_SALIENCY_H_
#define IASSA_SALIENCY_H_

#include <cstdint>
#include <span>
#include <vector>

#include "iassa/grid.h"
#include "iassa/masking.h"

namespace iassa {

// N x c classifier scores, one row per mask.
class ScoreMatrix {
 public:
  ScoreMatrix() = default;
  ScoreMatrix(size_t rows, int cols);
  // Every row must have the same length; entries must be finite. A
  // non-finite entry raises NumericError naming its row.
  explicit ScoreMatrix(const std::vector<std::vector<double>>& rows);

  size_t rows() const { return rows_; }
  int cols() const { return cols_; }
  double at(size_t row, int col) const {
    return values_[row * static_cast<size_t>(cols_) + col];
  }
  double& at(size_t row, int col) {
    return values_[row * static_cast<size_t>(cols_) + col];
  }
  std::span<const double> row(size_t i) const {
    return std::span<const double>(values_).subspan(
        i * static_cast<size_t>(cols_), static_cast<size_t>(cols_));
  }

 private:
  size_t rows_ = 0;
  int cols_ = 0;
  std::vector<double> values_;
};

// Keeps pixels where the mask is set and writes `fill` elsewhere.
ImageTensor MaskedImage(const ImageTensor& image, const Mask& mask,
                        float fill = 0.0f);

// S(l) = sum_i scores[i][cls] M_i(l) / C(l) for covered pixels, 0 otherwise:
// the mean score of the masks that keep l visible. Per-pixel sums run in mask
// order with compensated summation; work is split by rows, so the result is
// bit-identical for any thread count.
SaliencyMap Aggregate(const MaskSet& masks, const ScoreMatrix& scores, int cls,
                      int threads = 1);

// RISE weighting: sum_i scores[i][cls] M_i(l) / (p N).
SaliencyMap AggregateRise(const MaskSet& masks, const ScoreMatrix& scores,
                          int cls, double keep_probability, int threads = 1);

// fresh(l) where coverage(l) > 0, prev(l) elsewhere.
SaliencyMap MergeCarryForward(const SaliencyMap& prev,
                              const SaliencyMap& fresh,
                              std::span<const int32_t> coverage);

}  // namespace iassa

#endif  // IASSA_SALIENCY_H_
