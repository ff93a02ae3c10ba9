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

#ifndef IASSA_MASKING_H_
#define IASSA_MASKING_H_

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "iassa/grid.h"

namespace iassa {

// Square window placed at (top, left).
struct Window {
  int top = 0;
  int left = 0;
  int size = 0;

  friend bool operator==(const Window&, const Window&) = default;
};

// Binary H x W mask. Sliding-window masks keep only their rectangle; other
// masks keep a dense {0,1} bitmap.
class Mask {
 public:
  static Mask FromWindow(int height, int width, Window window);
  static Mask FromBits(int height, int width, std::vector<uint8_t> bits);

  int height() const { return height_; }
  int width() const { return width_; }
  const std::optional<Window>& window() const { return window_; }

  bool at(int row, int col) const;
  size_t CountSet() const;
  std::vector<uint8_t> Dense() const;

  // Calls fn(row, col_begin, col_end) for every maximal horizontal run of set
  // pixels, in row-major order.
  template <typename Fn>
  void ForEachRun(Fn&& fn) const {
    if (window_) {
      for (int r = window_->top; r < window_->top + window_->size; ++r) {
        fn(r, window_->left, window_->left + window_->size);
      }
      return;
    }
    for (int r = 0; r < height_; ++r) {
      const uint8_t* row = bits_.data() + static_cast<size_t>(r) * width_;
      int c = 0;
      while (c < width_) {
        while (c < width_ && row[c] == 0) ++c;
        const int begin = c;
        while (c < width_ && row[c] != 0) ++c;
        if (c > begin) fn(r, begin, c);
      }
    }
  }

 private:
  Mask() = default;

  int height_ = 0;
  int width_ = 0;
  std::optional<Window> window_;
  std::vector<uint8_t> bits_;
};

// Ordered masks over one H x W grid together with their per-pixel coverage
// counts, the empirical stand-in for E[M].
class MaskSet {
 public:
  // window/stride are 0 for masks that are not sliding windows.
  MaskSet(int height, int width, int window, int stride,
          std::vector<Mask> masks);

  int height() const { return height_; }
  int width() const { return width_; }
  int window() const { return window_; }
  int stride() const { return stride_; }
  size_t size() const { return masks_.size(); }
  bool empty() const { return masks_.empty(); }

  const Mask& operator[](size_t i) const { return masks_[i]; }
  const std::vector<Mask>& masks() const { return masks_; }
  std::span<const int32_t> coverage() const { return coverage_; }

  // Coverage counted again from the masks; equals coverage() by construction.
  std::vector<int32_t> RecomputeCoverage() const;

 private:
  int height_ = 0;
  int width_ = 0;
  int window_ = 0;
  int stride_ = 0;
  std::vector<Mask> masks_;
  std::vector<int32_t> coverage_;
};

// Binary H x W region, e.g. the highest activated region or a ground truth.
class RegionMask {
 public:
  RegionMask() = default;
  RegionMask(int height, int width);
  // bits must be {0,1}-valued with height * width entries.
  RegionMask(int height, int width, std::vector<uint8_t> bits);

  int height() const { return height_; }
  int width() const { return width_; }
  size_t count() const { return count_; }
  bool empty() const { return count_ == 0; }

  bool at(int row, int col) const {
    return bits_[static_cast<size_t>(row) * width_ + col] != 0;
  }
  void set(int row, int col, bool value);
  std::span<const uint8_t> bits() const { return bits_; }

 private:
  int height_ = 0;
  int width_ = 0;
  size_t count_ = 0;
  std::vector<uint8_t> bits_;
};

// Window/stride depreciation: both shrink by a fixed decrement per iteration
// down to their floors.
struct Schedule {
  int w0 = 45;
  int s0 = 8;
  double w_step = 1.5;
  double s_step = 0.2;
  int w_min = 2;
  int s_min = 1;

  void Validate() const;
};

struct WindowStride {
  int window = 0;
  int stride = 0;

  friend bool operator==(const WindowStride&, const WindowStride&) = default;
};

// win = max(w_min, round(w0 - w_step k)), stride likewise.
WindowStride ScheduleAt(const Schedule& schedule, int k);

// Window origins along one axis: 0, stride, 2 stride, ... while the window
// fits, plus a last origin flush with the far edge if needed.
std::vector<int> WindowOrigins(int extent, int window, int stride);

// One mask per window position, row-major over positions.
MaskSet SlidingWindowMasks(int height, int width, int window, int stride);

// RISE-style masks: grid_n x grid_n Bernoulli(p) cells, bilinearly upsampled
// to (grid_n + 1) cells, cropped at a random sub-cell shift and binarized at
// 0.5. Deterministic for a fixed seed.
MaskSet RandomRiseMasks(int height, int width, int grid_n, double p, int count,
                        uint64_t seed);

// region(l) = 1 iff s_norm(l) > t.
RegionMask HarThreshold(const SaliencyMap& s_norm, double t);

// Sliding-window positions whose window overlaps the region on at least
// overlap_frac of its area. Masks are full windows. When nothing qualifies
// the result is one window centred on the region's centroid, or on the image
// centre for an empty region.
MaskSet AdaptiveWindowMasks(const RegionMask& region, int window, int stride,
                            double overlap_frac = 0.25);

}  // namespace iassa

#endif  // IASSA_MASKING_H_
