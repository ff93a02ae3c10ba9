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

#ifndef IASSA_ATTENTION_H_
#define IASSA_ATTENTION_H_

#include <span>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "iassa/grid.h"

namespace iassa {

// H x W x C grid of real-valued features, row-major, interleaved channels.
class FeatureGrid {
 public:
  FeatureGrid() = default;
  FeatureGrid(int height, int width, int channels, double fill = 0.0);
  FeatureGrid(int height, int width, int channels, std::vector<double> data);

  int height() const { return height_; }
  int width() const { return width_; }
  int channels() const { return channels_; }
  size_t pixel_count() const {
    return static_cast<size_t>(height_) * static_cast<size_t>(width_);
  }

  double at(int row, int col, int channel) const {
    return data_[(static_cast<size_t>(row) * width_ + col) * channels_ +
                 channel];
  }
  double& at(int row, int col, int channel) {
    return data_[(static_cast<size_t>(row) * width_ + col) * channels_ +
                 channel];
  }
  std::span<const double> data() const { return data_; }
  std::span<double> mutable_data() { return data_; }

  // The HW x C row-major view used for the affinity product.
  Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic,
                                 Eigen::RowMajor>>
  AsMatrix() const {
    return {data_.data(), static_cast<Eigen::Index>(pixel_count()),
            static_cast<Eigen::Index>(channels_)};
  }

 private:
  int height_ = 0;
  int width_ = 0;
  int channels_ = 0;
  std::vector<double> data_;
};

// Feature maps from four depths of an extractor, shallow to deep.
using FeatureLevels = std::vector<FeatureGrid>;

struct FuseOptions {
  // L2-normalize each level per pixel before concatenation.
  bool l2_normalize = true;
  // Cap on the fused grid's height and width; the shallow level is
  // downsampled when it exceeds it. Bounds the (HW)^2 operator.
  int max_side = 56;
};

// Upsamples levels 2..4 to level 1's resolution (after capping) and
// concatenates channels: C = C1 + C2 + C3 + C4.
FeatureGrid FuseFeatures(const FeatureLevels& levels,
                         const FuseOptions& options = {});

// Row-stochastic HW x HW operator at feature resolution.
class AttentionOperator {
 public:
  using Matrix =
      Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

  AttentionOperator(int height, int width, Matrix matrix);

  int height() const { return height_; }
  int width() const { return width_; }
  const Matrix& matrix() const { return matrix_; }

 private:
  int height_;
  int width_;
  Matrix matrix_;
};

// A = row_softmax(F F^T) for the HW x C view F of the fused features. Each
// row subtracts its maximum before exponentiation. Throws NumericError on
// non-finite features.
AttentionOperator AffinityAttention(const FeatureGrid& fused, int threads = 1);

// Resamples s to the operator's resolution, computes A vec(s) and resamples
// back to s's resolution. Resampling is skipped when resolutions agree.
SaliencyMap ApplyAttention(const AttentionOperator& a, const SaliencyMap& s);

enum class AdjustMode {
  // lambda s + (1 - lambda) (A s)
  kConvex,
  // lambda s + (lambda - 1) (A s)
  kLiteral,
};

AdjustMode ParseAdjustMode(std::string_view name);
std::string_view AdjustModeName(AdjustMode mode);

SaliencyMap AdjustSaliency(const SaliencyMap& s, const SaliencyMap& attended,
                           double lambda_reg, AdjustMode mode);

}  // namespace iassa

#endif  // IASSA_ATTENTION_H_
