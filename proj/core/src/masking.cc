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

#include "iassa/masking.h"

#include <algorithm>
#include <cmath>
#include <string>

#include "iassa/error.h"
#include "iassa/rng.h"

namespace iassa {

Mask Mask::FromWindow(int height, int width, Window window) {
  if (height < 1 || width < 1) throw ArgumentError("mask dimensions must be positive");
  if (window.size < 1 || window.top < 0 || window.left < 0 ||
      window.top + window.size > height || window.left + window.size > width) {
    throw ArgumentError("window does not fit inside the mask");
  }
  Mask m;
  m.height_ = height;
  m.width_ = width;
  m.window_ = window;
  return m;
}

Mask Mask::FromBits(int height, int width, std::vector<uint8_t> bits) {
  if (height < 1 || width < 1) throw ArgumentError("mask dimensions must be positive");
  if (bits.size() != static_cast<size_t>(height) * width) {
    throw ArgumentError("mask length does not match its dimensions");
  }
  for (uint8_t b : bits) {
    if (b > 1) throw ArgumentError("mask values must be 0 or 1");
  }
  Mask m;
  m.height_ = height;
  m.width_ = width;
  m.bits_ = std::move(bits);
  return m;
}

bool Mask::at(int row, int col) const {
  if (window_) {
    return row >= window_->top && row < window_->top + window_->size &&
           col >= window_->left && col < window_->left + window_->size;
  }
  return bits_[static_cast<size_t>(row) * width_ + col] != 0;
}

size_t Mask::CountSet() const {
  if (window_) return static_cast<size_t>(window_->size) * window_->size;
  return static_cast<size_t>(std::count(bits_.begin(), bits_.end(), 1));
}

std::vector<uint8_t> Mask::Dense() const {
  if (!window_) return bits_;
  std::vector<uint8_t> dense(static_cast<size_t>(height_) * width_, 0);
  ForEachRun([&](int r, int begin, int end) {
    std::fill(dense.begin() + static_cast<ptrdiff_t>(r) * width_ + begin,
              dense.begin() + static_cast<ptrdiff_t>(r) * width_ + end, 1);
  });
  return dense;
}

MaskSet::MaskSet(int height, int width, int window, int stride,
                 std::vector<Mask> masks)
    : height_(height), width_(width), window_(window), stride_(stride),
      masks_(std::move(masks)) {
  if (height < 1 || width < 1) throw ArgumentError("mask set dimensions must be positive");
  for (const Mask& m : masks_) {
    if (m.height() != height || m.width() != width) {
      throw ArgumentError("mask dimensions differ from the mask set");
    }
  }
  coverage_ = RecomputeCoverage();
}

std::vector<int32_t> MaskSet::RecomputeCoverage() const {
  std::vector<int32_t> coverage(static_cast<size_t>(height_) * width_, 0);
  for (const Mask& m : masks_) {
    m.ForEachRun([&](int r, int begin, int end) {
      int32_t* row = coverage.data() + static_cast<size_t>(r) * width_;
      for (int c = begin; c < end; ++c) ++row[c];
    });
  }
  return coverage;
}

RegionMask::RegionMask(int height, int width)
    : height_(height), width_(width),
      bits_(static_cast<size_t>(std::max(height, 0)) * std::max(width, 0), 0) {
  if (height < 1 || width < 1) throw ArgumentError("region dimensions must be positive");
}

RegionMask::RegionMask(int height, int width, std::vector<uint8_t> bits)
    : height_(height), width_(width), bits_(std::move(bits)) {
  if (height < 1 || width < 1) throw ArgumentError("region dimensions must be positive");
  if (bits_.size() != static_cast<size_t>(height) * width) {
    throw ArgumentError("region length does not match its dimensions");
  }
  for (uint8_t b : bits_) {
    if (b > 1) throw ArgumentError("region values must be 0 or 1");
    count_ += b;
  }
}

void RegionMask::set(int row, int col, bool value) {
  uint8_t& bit = bits_[static_cast<size_t>(row) * width_ + col];
  if (bit != static_cast<uint8_t>(value)) {
    count_ = value ? count_ + 1 : count_ - 1;
    bit = value ? 1 : 0;
  }
}

void Schedule::Validate() const {
  if (w_min < 1 || s_min < 1) throw ArgumentError("schedule floors must be at least 1");
  if (w0 < w_min) throw ArgumentError("initial window is below its floor");
  if (s0 < s_min) throw ArgumentError("initial stride is below its floor");
  if (!(w_step >= 0.0) || !(s_step >= 0.0)) {
    throw ArgumentError("schedule steps must be non-negative");
  }
}

WindowStride ScheduleAt(const Schedule& schedule, int k) {
  if (k < 0) throw ArgumentError("iteration index must be non-negative");
  const long window = std::lround(schedule.w0 - schedule.w_step * k);
  const long stride = std::lround(schedule.s0 - schedule.s_step * k);
  return {static_cast<int>(std::max<long>(schedule.w_min, window)),
          static_cast<int>(std::max<long>(schedule.s_min, stride))};
}

std::vector<int> WindowOrigins(int extent, int window, int stride) {
  if (window < 1 || window > extent) {
    throw ArgumentError("window " + std::to_string(window) +
                        " does not fit an extent of " + std::to_string(extent));
  }
  if (stride < 1) throw ArgumentError("stride must be at least 1");
  std::vector<int> origins;
  for (int p = 0; p + window <= extent; p += stride) origins.push_back(p);
  if (origins.back() + window < extent) origins.push_back(extent - window);
  return origins;
}

MaskSet SlidingWindowMasks(int height, int width, int window, int stride) {
  const std::vector<int> rows = WindowOrigins(height, window, stride);
  const std::vector<int> cols = WindowOrigins(width, window, stride);
  std::vector<Mask> masks;
  masks.reserve(rows.size() * cols.size());
  for (int top : rows) {
    for (int left : cols) {
      masks.push_back(Mask::FromWindow(height, width, {top, left, window}));
    }
  }
  return MaskSet(height, width, window, stride, std::move(masks));
}

MaskSet RandomRiseMasks(int height, int width, int grid_n, double p, int count,
                        uint64_t seed) {
  if (height < 1 || width < 1) throw ArgumentError("mask dimensions must be positive");
  if (grid_n < 1) throw ArgumentError("RISE grid must have at least one cell");
  if (!(p > 0.0 && p < 1.0)) throw ArgumentError("keep probability must lie in (0, 1)");
  if (count < 1) throw ArgumentError("RISE needs at least one mask");

  const int cell_h = (height + grid_n - 1) / grid_n;
  const int cell_w = (width + grid_n - 1) / grid_n;
  const int up_h = (grid_n + 1) * cell_h;
  const int up_w = (grid_n + 1) * cell_w;

  Rng rng(seed);
  std::vector<Mask> masks;
  masks.reserve(count);
  std::vector<double> cells(static_cast<size_t>(grid_n) * grid_n);
  for (int n = 0; n < count; ++n) {
    for (double& cell : cells) cell = rng.Bernoulli(p) ? 1.0 : 0.0;
    const int dy = static_cast<int>(rng.Below(static_cast<uint64_t>(cell_h)));
    const int dx = static_cast<int>(rng.Below(static_cast<uint64_t>(cell_w)));
    const std::vector<double> up =
        ResizeBilinear(cells, grid_n, grid_n, 1, up_h, up_w);
    std::vector<uint8_t> bits(static_cast<size_t>(height) * width);
    for (int r = 0; r < height; ++r) {
      for (int c = 0; c < width; ++c) {
        const double v = up[static_cast<size_t>(r + dy) * up_w + (c + dx)];
        bits[static_cast<size_t>(r) * width + c] = v >= 0.5 ? 1 : 0;
      }
    }
    masks.push_back(Mask::FromBits(height, width, std::move(bits)));
  }
  return MaskSet(height, width, 0, 0, std::move(masks));
}

RegionMask HarThreshold(const SaliencyMap& s_norm, double t) {
  std::vector<uint8_t> bits(s_norm.size());
  const auto v = s_norm.values();
  for (size_t i = 0; i < bits.size(); ++i) bits[i] = v[i] > t ? 1 : 0;
  return RegionMask(s_norm.height(), s_norm.width(), std::move(bits));
}

MaskSet AdaptiveWindowMasks(const RegionMask& region, int window, int stride,
                            double overlap_frac) {
  const int h = region.height();
  const int w = region.width();
  const std::vector<int> rows = WindowOrigins(h, window, stride);
  const std::vector<int> cols = WindowOrigins(w, window, stride);

  // Summed-area table of the region for O(1) window overlaps.
  std::vector<int64_t> sat(static_cast<size_t>(h + 1) * (w + 1), 0);
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) {
      sat[static_cast<size_t>(r + 1) * (w + 1) + c + 1] =
          region.at(r, c) + sat[static_cast<size_t>(r) * (w + 1) + c + 1] +
          sat[static_cast<size_t>(r + 1) * (w + 1) + c] -
          sat[static_cast<size_t>(r) * (w + 1) + c];
    }
  }
  const auto overlap = [&](int top, int left) {
    const auto at = [&](int r, int c) { return sat[static_cast<size_t>(r) * (w + 1) + c]; };
    return at(top + window, left + window) - at(top, left + window) -
           at(top + window, left) + at(top, left);
  };

  const double needed = overlap_frac * window * window;
  std::vector<Mask> masks;
  if (!region.empty()) {
    for (int top : rows) {
      for (int left : cols) {
        if (static_cast<double>(overlap(top, left)) >= needed) {
          masks.push_back(Mask::FromWindow(h, w, {top, left, window}));
        }
      }
    }
  }
  if (masks.empty()) {
    double centre_r = 0.5 * (h - 1);
    double centre_c = 0.5 * (w - 1);
    if (!region.empty()) {
      double sum_r = 0.0;
      double sum_c = 0.0;
      for (int r = 0; r < h; ++r) {
        for (int c = 0; c < w; ++c) {
          if (region.at(r, c)) {
            sum_r += r;
            sum_c += c;
          }
        }
      }
      centre_r = sum_r / static_cast<double>(region.count());
      centre_c = sum_c / static_cast<double>(region.count());
    }
    const int top = std::clamp(
        static_cast<int>(std::lround(centre_r - 0.5 * (window - 1))), 0, h - window);
    const int left = std::clamp(
        static_cast<int>(std::lround(centre_c - 0.5 * (window - 1))), 0, w - window);
    masks.push_back(Mask::FromWindow(h, w, {top, left, window}));
  }
  return MaskSet(h, w, window, stride, std::move(masks));
}

}  // namespace iassa
