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

#include "iassa/attention.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "iassa/error.h"
#include "iassa/parallel.h"

namespace iassa {
namespace {

void L2NormalizePixels(std::vector<double>& data, size_t pixels, int channels) {
  for (size_t p = 0; p < pixels; ++p) {
    double* v = data.data() + p * channels;
    double norm = 0.0;
    for (int k = 0; k < channels; ++k) norm += v[k] * v[k];
    norm = std::sqrt(norm);
    if (norm > 0.0) {
      for (int k = 0; k < channels; ++k) v[k] /= norm;
    }
  }
}

}  // namespace

FeatureGrid::FeatureGrid(int height, int width, int channels, double fill)
    : height_(height), width_(width), channels_(channels) {
  if (height < 1 || width < 1 || channels < 1) {
    throw ArgumentError("feature grid dimensions must be positive");
  }
  data_.assign(pixel_count() * channels, fill);
}

FeatureGrid::FeatureGrid(int height, int width, int channels,
                         std::vector<double> data)
    : height_(height), width_(width), channels_(channels),
      data_(std::move(data)) {
  if (height < 1 || width < 1 || channels < 1) {
    throw ArgumentError("feature grid dimensions must be positive");
  }
  if (data_.size() != pixel_count() * channels) {
    throw ArgumentError("feature data length does not match its dimensions");
  }
}

FeatureGrid FuseFeatures(const FeatureLevels& levels,
                         const FuseOptions& options) {
  if (levels.size() != 4) {
    throw ArgumentError("expected 4 feature levels, got " +
                        std::to_string(levels.size()));
  }
  for (size_t i = 0; i < levels.size(); ++i) {
    if (levels[i].pixel_count() == 0 || levels[i].channels() < 1) {
      throw ArgumentError("feature level " + std::to_string(i + 1) + " is empty");
    }
    for (double v : levels[i].data()) {
      if (!std::isfinite(v)) {
        throw NumericError("feature level " + std::to_string(i + 1) +
                           " has non-finite values");
      }
    }
  }
  const FeatureGrid& shallow = levels[0];
  for (size_t i = 1; i < levels.size(); ++i) {
    if (levels[i].height() > shallow.height() ||
        levels[i].width() > shallow.width()) {
      throw ArgumentError("feature level 1 must have the largest resolution");
    }
  }
  if (options.max_side < 1) throw ArgumentError("max_side must be positive");
  const int out_h = std::min(shallow.height(), options.max_side);
  const int out_w = std::min(shallow.width(), options.max_side);

  int total_channels = 0;
  for (const FeatureGrid& level : levels) total_channels += level.channels();

  const size_t pixels = static_cast<size_t>(out_h) * out_w;
  std::vector<double> fused(pixels * total_channels);
  int offset = 0;
  for (const FeatureGrid& level : levels) {
    const int ch = level.channels();
    std::vector<double> up = ResizeBilinear(level.data(), level.height(),
                                            level.width(), ch, out_h, out_w);
    if (options.l2_normalize) L2NormalizePixels(up, pixels, ch);
    for (size_t p = 0; p < pixels; ++p) {
      std::copy_n(up.begin() + static_cast<ptrdiff_t>(p * ch), ch,
                  fused.begin() + static_cast<ptrdiff_t>(p * total_channels + offset));
    }
    offset += ch;
  }
  return FeatureGrid(out_h, out_w, total_channels, std::move(fused));
}

AttentionOperator::AttentionOperator(int height, int width, Matrix matrix)
    : height_(height), width_(width), matrix_(std::move(matrix)) {
  const auto n = static_cast<Eigen::Index>(height) * width;
  if (height < 1 || width < 1 || matrix_.rows() != n || matrix_.cols() != n) {
    throw ArgumentError("attention operator must be (HW) x (HW)");
  }
}

AttentionOperator AffinityAttention(const FeatureGrid& fused, int threads) {
  if (fused.pixel_count() == 0) throw ArgumentError("empty feature grid");
  for (double v : fused.data()) {
    if (!std::isfinite(v)) throw NumericError("non-finite feature value");
  }
  const auto features = fused.AsMatrix();
  AttentionOperator::Matrix logits = features * features.transpose();
  const Eigen::Index n = logits.rows();
  ParallelFor(static_cast<size_t>(n), threads, [&](size_t begin, size_t end) {
    for (auto i = static_cast<Eigen::Index>(begin);
         i < static_cast<Eigen::Index>(end); ++i) {
      auto row = logits.row(i);
      const double peak = row.maxCoeff();
      double total = 0.0;
      for (Eigen::Index j = 0; j < n; ++j) {
        // Floor at the smallest normal so entries stay strictly positive
        // when exp underflows.
        const double e = std::max(std::exp(row(j) - peak),
                                  std::numeric_limits<double>::min());
        row(j) = e;
        total += e;
      }
      row /= total;
    }
  });
  if (!logits.allFinite()) throw NumericError("attention softmax overflowed");
  return AttentionOperator(fused.height(), fused.width(), std::move(logits));
}

SaliencyMap ApplyAttention(const AttentionOperator& a, const SaliencyMap& s) {
  const bool resample = s.height() != a.height() || s.width() != a.width();
  const std::vector<double> small =
      resample ? ResizeBilinear(s.values(), s.height(), s.width(), 1,
                                a.height(), a.width())
               : std::vector<double>(s.values().begin(), s.values().end());

  // A is row-stochastic, so A s = A (s - r) + r. Centering on one entry keeps
  // a constant input exactly constant.
  const double reference = small[0];
  Eigen::VectorXd centred(static_cast<Eigen::Index>(small.size()));
  for (size_t i = 0; i < small.size(); ++i) {
    centred(static_cast<Eigen::Index>(i)) = small[i] - reference;
  }
  const Eigen::VectorXd product = a.matrix() * centred;
  std::vector<double> out(small.size());
  for (size_t i = 0; i < out.size(); ++i) {
    out[i] = product(static_cast<Eigen::Index>(i)) + reference;
  }
  SaliencyMap attended(a.height(), a.width(), std::move(out));
  return resample ? ResizeBilinear(attended, s.height(), s.width()) : attended;
}

AdjustMode ParseAdjustMode(std::string_view name) {
  if (name == "convex") return AdjustMode::kConvex;
  if (name == "literal") return AdjustMode::kLiteral;
  throw ArgumentError("unknown adjust mode '" + std::string(name) + "'");
}

std::string_view AdjustModeName(AdjustMode mode) {
  return mode == AdjustMode::kConvex ? "convex" : "literal";
}

SaliencyMap AdjustSaliency(const SaliencyMap& s, const SaliencyMap& attended,
                           double lambda_reg, AdjustMode mode) {
  if (s.height() != attended.height() || s.width() != attended.width()) {
    throw ArgumentError("adjust_saliency inputs have different dimensions");
  }
  if (!(lambda_reg >= 0.0 && lambda_reg <= 1.0)) {
    throw ArgumentError("lambda must lie in [0, 1]");
  }
  const double attention_weight =
      mode == AdjustMode::kConvex ? 1.0 - lambda_reg : lambda_reg - 1.0;
  SaliencyMap out(s.height(), s.width(), 0.0);
  auto dst = out.mutable_values();
  for (size_t i = 0; i < dst.size(); ++i) {
    dst[i] = lambda_reg * s[i] + attention_weight * attended[i];
  }
  return out;
}

}  // namespace iassa
