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

#include "iassa/grid.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "iassa/error.h"

namespace iassa {
namespace {

void CheckDims(int height, int width, int channels) {
  if (height < 1 || width < 1) {
    throw ArgumentError("grid dimensions must be positive, got " +
                        std::to_string(height) + "x" + std::to_string(width));
  }
  if (channels < 1) throw ArgumentError("channel count must be positive");
}

// Source coordinate of output index i under corner alignment.
inline double SourceCoord(int i, int src_extent, int out_extent) {
  if (out_extent == 1) return 0.5 * (src_extent - 1);
  return static_cast<double>(i) * (src_extent - 1) / (out_extent - 1);
}

template <typename T>
std::vector<T> ResizeImpl(std::span<const T> src, int height, int width,
                          int channels, int out_height, int out_width) {
  CheckDims(height, width, channels);
  if (out_height < 1 || out_width < 1) {
    throw ArgumentError("resize target dimensions must be positive");
  }
  if (src.size() != static_cast<size_t>(height) * width * channels) {
    throw ArgumentError("resize source length does not match its dimensions");
  }
  if (out_height == height && out_width == width) {
    return std::vector<T>(src.begin(), src.end());
  }

  std::vector<int> x0(out_width), x1(out_width);
  std::vector<double> tx(out_width);
  for (int j = 0; j < out_width; ++j) {
    const double x = SourceCoord(j, width, out_width);
    x0[j] = std::min(static_cast<int>(std::floor(x)), width - 1);
    x1[j] = std::min(x0[j] + 1, width - 1);
    tx[j] = x - x0[j];
  }

  std::vector<T> out(static_cast<size_t>(out_height) * out_width * channels);
  for (int i = 0; i < out_height; ++i) {
    const double y = SourceCoord(i, height, out_height);
    const int y0 = std::min(static_cast<int>(std::floor(y)), height - 1);
    const int y1 = std::min(y0 + 1, height - 1);
    const double ty = y - y0;
    for (int j = 0; j < out_width; ++j) {
      for (int c = 0; c < channels; ++c) {
        const double a = src[(static_cast<size_t>(y0) * width + x0[j]) * channels + c];
        const double b = src[(static_cast<size_t>(y0) * width + x1[j]) * channels + c];
        const double d = src[(static_cast<size_t>(y1) * width + x0[j]) * channels + c];
        const double e = src[(static_cast<size_t>(y1) * width + x1[j]) * channels + c];
        const double top = a + (b - a) * tx[j];
        const double bottom = d + (e - d) * tx[j];
        double v = top + (bottom - top) * ty;
        // Rounding must not push the result past the taps.
        const double lo = std::min(std::min(a, b), std::min(d, e));
        const double hi = std::max(std::max(a, b), std::max(d, e));
        v = std::clamp(v, lo, hi);
        out[(static_cast<size_t>(i) * out_width + j) * channels + c] =
            static_cast<T>(v);
      }
    }
  }
  return out;
}

}  // namespace

ImageTensor::ImageTensor(int height, int width, int channels, float fill)
    : height_(height), width_(width), channels_(channels) {
  CheckDims(height, width, channels);
  if (!(fill >= 0.0f && fill <= 1.0f)) {
    throw ArgumentError("image fill must lie in [0, 1]");
  }
  data_.assign(static_cast<size_t>(height) * width * channels, fill);
}

ImageTensor::ImageTensor(int height, int width, int channels,
                         std::vector<float> data)
    : height_(height), width_(width), channels_(channels),
      data_(std::move(data)) {
  CheckDims(height, width, channels);
  if (data_.size() != static_cast<size_t>(height) * width * channels) {
    throw ArgumentError("image data length " + std::to_string(data_.size()) +
                        " does not match " + std::to_string(height) + "x" +
                        std::to_string(width) + "x" +
                        std::to_string(channels));
  }
  for (size_t i = 0; i < data_.size(); ++i) {
    if (!(data_[i] >= 0.0f && data_[i] <= 1.0f)) {
      throw ArgumentError("image value at offset " + std::to_string(i) +
                          " is outside [0, 1]");
    }
  }
}

void ImageTensor::set(int row, int col, int channel, float value) {
  data_[Offset(row, col, channel)] = std::clamp(value, 0.0f, 1.0f);
}

SaliencyMap::SaliencyMap(int height, int width, double fill)
    : height_(height), width_(width) {
  CheckDims(height, width, 1);
  if (!std::isfinite(fill)) throw NumericError("saliency fill is not finite");
  values_.assign(static_cast<size_t>(height) * width, fill);
}

SaliencyMap::SaliencyMap(int height, int width, std::vector<double> values)
    : height_(height), width_(width), values_(std::move(values)) {
  CheckDims(height, width, 1);
  if (values_.size() != static_cast<size_t>(height) * width) {
    throw ArgumentError("saliency length does not match its dimensions");
  }
  for (size_t i = 0; i < values_.size(); ++i) {
    if (!std::isfinite(values_[i])) {
      throw NumericError("saliency value at index " + std::to_string(i) +
                         " is not finite");
    }
  }
}

double SaliencyMap::Min() const {
  return *std::min_element(values_.begin(), values_.end());
}

double SaliencyMap::Max() const {
  return *std::max_element(values_.begin(), values_.end());
}

PixelIndex SaliencyMap::ArgMax() const {
  // max_element returns the first maximal element.
  const size_t flat = static_cast<size_t>(
      std::max_element(values_.begin(), values_.end()) - values_.begin());
  return {static_cast<int>(flat / width_), static_cast<int>(flat % width_)};
}

std::vector<double> ResizeBilinear(std::span<const double> src, int height,
                                   int width, int channels, int out_height,
                                   int out_width) {
  return ResizeImpl(src, height, width, channels, out_height, out_width);
}

std::vector<float> ResizeBilinear(std::span<const float> src, int height,
                                  int width, int channels, int out_height,
                                  int out_width) {
  return ResizeImpl(src, height, width, channels, out_height, out_width);
}

ImageTensor ResizeBilinear(const ImageTensor& src, int out_height,
                           int out_width) {
  return ImageTensor(out_height, out_width, src.channels(),
                     ResizeImpl(src.data(), src.height(), src.width(),
                                src.channels(), out_height, out_width));
}

SaliencyMap ResizeBilinear(const SaliencyMap& src, int out_height,
                           int out_width) {
  return SaliencyMap(out_height, out_width,
                     ResizeImpl(src.values(), src.height(), src.width(), 1,
                                out_height, out_width));
}

std::vector<double> GaussianKernel(double sigma) {
  if (!(sigma > 0.0) || !std::isfinite(sigma)) {
    throw ArgumentError("gaussian sigma must be positive");
  }
  const int radius = static_cast<int>(std::ceil(3.0 * sigma));
  std::vector<double> kernel(2 * radius + 1);
  double total = 0.0;
  for (int k = -radius; k <= radius; ++k) {
    const double w = std::exp(-0.5 * (k * k) / (sigma * sigma));
    kernel[k + radius] = w;
    total += w;
  }
  for (double& w : kernel) w /= total;
  return kernel;
}

ImageTensor GaussianBlur(const ImageTensor& src, double sigma) {
  const std::vector<double> kernel = GaussianKernel(sigma);
  const int radius = static_cast<int>(kernel.size() / 2);
  const int h = src.height();
  const int w = src.width();
  const int ch = src.channels();
  const auto in = src.data();

  std::vector<double> horizontal(in.size());
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) {
      for (int k = 0; k < ch; ++k) {
        double acc = 0.0;
        for (int t = -radius; t <= radius; ++t) {
          const int cc = std::clamp(c + t, 0, w - 1);
          acc += kernel[t + radius] * in[src.Offset(r, cc, k)];
        }
        horizontal[src.Offset(r, c, k)] = acc;
      }
    }
  }

  std::vector<float> out(in.size());
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) {
      for (int k = 0; k < ch; ++k) {
        double acc = 0.0;
        for (int t = -radius; t <= radius; ++t) {
          const int rr = std::clamp(r + t, 0, h - 1);
          acc += kernel[t + radius] * horizontal[src.Offset(rr, c, k)];
        }
        out[src.Offset(r, c, k)] =
            static_cast<float>(std::clamp(acc, 0.0, 1.0));
      }
    }
  }
  return ImageTensor(h, w, ch, std::move(out));
}

SaliencyMap MinMaxNormalize(const SaliencyMap& s) {
  const double lo = s.Min();
  const double hi = s.Max();
  SaliencyMap out(s.height(), s.width(), 0.0);
  if (!(hi > lo)) return out;
  const double range = hi - lo;
  auto dst = out.mutable_values();
  const auto src = s.values();
  for (size_t i = 0; i < src.size(); ++i) dst[i] = (src[i] - lo) / range;
  return out;
}

SaliencyMap ChannelMean(const ImageTensor& image) {
  SaliencyMap out(image.height(), image.width(), 0.0);
  const int ch = image.channels();
  const auto data = image.data();
  auto dst = out.mutable_values();
  for (size_t p = 0; p < dst.size(); ++p) {
    double acc = 0.0;
    for (int k = 0; k < ch; ++k) acc += data[p * ch + k];
    dst[p] = acc / ch;
  }
  return out;
}

}  // namespace iassa
