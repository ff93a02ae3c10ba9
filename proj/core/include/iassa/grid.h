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

#ifndef IASSA_GRID_H_
#define IASSA_GRID_H_

#include <cstddef>
#include <span>
#include <vector>

namespace iassa {

// Flat row-major pixel position inside a grid.
struct PixelIndex {
  int row = 0;
  int col = 0;

  friend bool operator==(const PixelIndex&, const PixelIndex&) = default;
};

// H x W x C image with intensities in the unit interval, stored row-major
// with interleaved channels. Channels is 1 (grey) or 3 (RGB).
class ImageTensor {
 public:
  ImageTensor() = default;
  ImageTensor(int height, int width, int channels, float fill = 0.0f);
  // Validates the length and that every value lies in [0, 1].
  ImageTensor(int height, int width, int channels, std::vector<float> data);

  int height() const { return height_; }
  int width() const { return width_; }
  int channels() const { return channels_; }
  size_t pixel_count() const {
    return static_cast<size_t>(height_) * static_cast<size_t>(width_);
  }
  bool empty() const { return data_.empty(); }

  float at(int row, int col, int channel) const {
    return data_[Offset(row, col, channel)];
  }
  // Writes are clamped to [0, 1].
  void set(int row, int col, int channel, float value);

  std::span<const float> data() const { return data_; }
  // Raw access for kernels that maintain the [0, 1] invariant themselves.
  std::span<float> mutable_data() { return data_; }

  size_t Offset(int row, int col, int channel) const {
    return (static_cast<size_t>(row) * width_ + col) * channels_ + channel;
  }

 private:
  int height_ = 0;
  int width_ = 0;
  int channels_ = 0;
  std::vector<float> data_;
};

// H x W grid of finite importance values, row-major.
class SaliencyMap {
 public:
  SaliencyMap() = default;
  SaliencyMap(int height, int width, double fill = 0.0);
  // Validates the length and that every value is finite.
  SaliencyMap(int height, int width, std::vector<double> values);

  int height() const { return height_; }
  int width() const { return width_; }
  size_t size() const { return values_.size(); }
  bool empty() const { return values_.empty(); }

  double at(int row, int col) const {
    return values_[static_cast<size_t>(row) * width_ + col];
  }
  double& at(int row, int col) {
    return values_[static_cast<size_t>(row) * width_ + col];
  }
  double operator[](size_t flat) const { return values_[flat]; }
  double& operator[](size_t flat) { return values_[flat]; }

  std::span<const double> values() const { return values_; }
  std::span<double> mutable_values() { return values_; }

  double Min() const;
  double Max() const;
  // Lowest row-major index among the maximal values.
  PixelIndex ArgMax() const;

 private:
  int height_ = 0;
  int width_ = 0;
  std::vector<double> values_;
};

// Corner-aligned bilinear resampling of an interleaved H x W x C buffer.
// Output values stay within the [min, max] of the four source taps, so the
// result never overshoots the source range. Same dimensions copy verbatim.
std::vector<double> ResizeBilinear(std::span<const double> src, int height,
                                   int width, int channels, int out_height,
                                   int out_width);
std::vector<float> ResizeBilinear(std::span<const float> src, int height,
                                  int width, int channels, int out_height,
                                  int out_width);

ImageTensor ResizeBilinear(const ImageTensor& src, int out_height,
                           int out_width);
SaliencyMap ResizeBilinear(const SaliencyMap& src, int out_height,
                           int out_width);

// Separable Gaussian blur, kernel radius ceil(3 sigma), clamped borders.
ImageTensor GaussianBlur(const ImageTensor& src, double sigma);

// The normalized 1-D kernel used by GaussianBlur (length 2 * radius + 1).
std::vector<double> GaussianKernel(double sigma);

// (s - min) / (max - min); a constant map becomes all zeros.
SaliencyMap MinMaxNormalize(const SaliencyMap& s);

// Mean over channels at each pixel, as a saliency-shaped grid.
SaliencyMap ChannelMean(const ImageTensor& image);

}  // namespace iassa

#endif  // IASSA_GRID_H_
