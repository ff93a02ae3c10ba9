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
#include <vector>

#include <gtest/gtest.h>

#include "iassa/error.h"
#include "test_support.h"

namespace iassa {
namespace {

using testing::RandomImage;
using testing::RandomMap;

// Corner-aligned bilinear sample of an h x w grid, written out longhand.
double BilinearOracle(const std::vector<double>& src, int h, int w, int oh,
                      int ow, int i, int j) {
  const double y = oh == 1 ? (h - 1) / 2.0 : i * double(h - 1) / (oh - 1);
  const double x = ow == 1 ? (w - 1) / 2.0 : j * double(w - 1) / (ow - 1);
  const int y0 = std::min(int(std::floor(y)), h - 1);
  const int x0 = std::min(int(std::floor(x)), w - 1);
  const int y1 = std::min(y0 + 1, h - 1);
  const int x1 = std::min(x0 + 1, w - 1);
  const double fy = y - y0;
  const double fx = x - x0;
  auto v = [&](int r, int c) { return src[r * w + c]; };
  return (1 - fy) * ((1 - fx) * v(y0, x0) + fx * v(y0, x1)) +
         fy * ((1 - fx) * v(y1, x0) + fx * v(y1, x1));
}

// Direct 2-D convolution with a (2r+1)^2 Gaussian and clamped edges.
double BlurOracle(const ImageTensor& img, double sigma, int row, int col, int ch) {
  const int r = int(std::ceil(3 * sigma));
  double acc = 0.0;
  double total = 0.0;
  for (int dy = -r; dy <= r; ++dy) {
    for (int dx = -r; dx <= r; ++dx) {
      const double g = std::exp(-(dx * dx + dy * dy) / (2 * sigma * sigma));
      const int y = std::clamp(row + dy, 0, img.height() - 1);
      const int x = std::clamp(col + dx, 0, img.width() - 1);
      acc += g * img.at(y, x, ch);
      total += g;
    }
  }
  return acc / total;
}

TEST(ImageTensorTest, RejectsOutOfRangeValues) {
  EXPECT_THROW(ImageTensor(1, 2, 1, std::vector<float>{0.5f, 1.5f}), ArgumentError);
  EXPECT_THROW(ImageTensor(1, 1, 1, std::vector<float>{-0.1f}), ArgumentError);
  EXPECT_THROW(ImageTensor(1, 1, 1, std::vector<float>{std::nanf("")}),
               ArgumentError);
  EXPECT_THROW(ImageTensor(2, 2, 1, std::vector<float>{0.f}), ArgumentError);
  EXPECT_THROW(ImageTensor(0, 2, 1), ArgumentError);
}

TEST(ImageTensorTest, LayoutIsRowMajorInterleaved) {
  ImageTensor img(2, 3, 3);
  img.set(1, 2, 1, 0.25f);
  EXPECT_EQ(img.Offset(1, 2, 1), (1 * 3 + 2) * 3 + 1u);
  EXPECT_EQ(img.data()[img.Offset(1, 2, 1)], 0.25f);
  EXPECT_EQ(img.pixel_count(), 6u);
}

TEST(SaliencyMapTest, RejectsNonFiniteValues) {
  EXPECT_THROW(SaliencyMap(1, 2, std::vector<double>{1.0, INFINITY}), NumericError);
  EXPECT_THROW(SaliencyMap(1, 1, std::vector<double>{NAN}), NumericError);
}

TEST(SaliencyMapTest, ArgMaxTiesGoToLowestIndex) {
  const SaliencyMap s(2, 2, std::vector<double>{0.1, 0.9, 0.9, 0.2});
  EXPECT_EQ(s.ArgMax(), (PixelIndex{0, 1}));
  EXPECT_EQ(SaliencyMap(3, 3, 1.0).ArgMax(), (PixelIndex{0, 0}));
}

TEST(ResizeTest, IdentityIsBitwise) {
  const SaliencyMap s = RandomMap(1, 5, 7, -3, 3);
  const SaliencyMap out = ResizeBilinear(s, 5, 7);
  ASSERT_EQ(out.size(), s.size());
  for (size_t i = 0; i < s.size(); ++i) EXPECT_EQ(out[i], s[i]);
}

TEST(ResizeTest, OneByTwoToOneByFour) {
  const SaliencyMap s(1, 2, std::vector<double>{0.0, 1.0});
  const SaliencyMap out = ResizeBilinear(s, 1, 4);
  EXPECT_DOUBLE_EQ(out[0], 0.0);
  EXPECT_DOUBLE_EQ(out[1], 1.0 / 3);
  EXPECT_DOUBLE_EQ(out[2], 2.0 / 3);
  EXPECT_DOUBLE_EQ(out[3], 1.0);
}

TEST(ResizeTest, MatchesBruteForceOracle) {
  const int shapes[][4] = {{2, 2, 8, 8}, {5, 3, 9, 11}, {9, 9, 4, 2},
                           {7, 6, 1, 1}, {1, 5, 3, 1}, {64, 64, 16, 16}};
  uint64_t seed = 10;
  for (const auto& sh : shapes) {
    const SaliencyMap s = RandomMap(seed++, sh[0], sh[1]);
    const SaliencyMap out = ResizeBilinear(s, sh[2], sh[3]);
    const std::vector<double> src(s.values().begin(), s.values().end());
    for (int i = 0; i < sh[2]; ++i) {
      for (int j = 0; j < sh[3]; ++j) {
        EXPECT_NEAR(out.at(i, j), BilinearOracle(src, sh[0], sh[1], sh[2], sh[3], i, j),
                    1e-12);
      }
    }
  }
}

TEST(ResizeTest, UpThenDownRecoversCornerSamples) {
  // 2 -> 8 places the source samples on output corners, so a corner-aligned
  // 8 -> 2 resize reads them back exactly.
  for (uint64_t seed = 0; seed < 50; ++seed) {
    const SaliencyMap s = RandomMap(seed, 2, 2);
    const SaliencyMap back = ResizeBilinear(ResizeBilinear(s, 8, 8), 2, 2);
    for (size_t i = 0; i < 4; ++i) EXPECT_NEAR(back[i], s[i], 1e-12);
  }
}

TEST(ResizeTest, BlockAverageOfUpsampleHasClosedForm) {
  // Averaging each 4x4 block of the 2 -> 8 upsample equals the bilinear
  // surface at fractional offset t = mean(0, 1, 2, 3) / 7 from the block's
  // corner, mirrored for the far blocks.
  const double t = 1.5 / 7;
  for (uint64_t seed = 100; seed < 150; ++seed) {
    const SaliencyMap s = RandomMap(seed, 2, 2);
    const SaliencyMap up = ResizeBilinear(s, 8, 8);
    for (int by = 0; by < 2; ++by) {
      for (int bx = 0; bx < 2; ++bx) {
        double mean = 0.0;
        for (int y = 0; y < 4; ++y) {
          for (int x = 0; x < 4; ++x) mean += up.at(4 * by + y, 4 * bx + x);
        }
        mean /= 16;
        const double fy = by == 0 ? t : 1 - t;
        const double fx = bx == 0 ? t : 1 - t;
        const double expected = (1 - fy) * ((1 - fx) * s[0] + fx * s[1]) +
                                fy * ((1 - fx) * s[2] + fx * s[3]);
        EXPECT_NEAR(mean, expected, 1e-12);
        EXPECT_NEAR(mean, s.at(by, bx), t * 2 * std::abs(s.Max() - s.Min()) + 1e-12);
      }
    }
  }
}

TEST(ResizeTest, NeverOvershootsSourceRange) {
  for (uint64_t seed = 0; seed < 200; ++seed) {
    Rng rng(seed);
    const int h = 1 + int(rng.Below(9));
    const int w = 1 + int(rng.Below(9));
    const SaliencyMap s = RandomMap(seed, h, w, -5, 5);
    const SaliencyMap out =
        ResizeBilinear(s, 1 + int(rng.Below(20)), 1 + int(rng.Below(20)));
    for (double v : out.values()) {
      EXPECT_GE(v, s.Min());
      EXPECT_LE(v, s.Max());
    }
  }
}

TEST(ResizeTest, ImageResizeKeepsChannelsSeparate) {
  const ImageTensor img = RandomImage(3, 4, 5, 3);
  const ImageTensor out = ResizeBilinear(img, 7, 3);
  std::vector<double> plane(20);
  for (int ch = 0; ch < 3; ++ch) {
    for (int i = 0; i < 20; ++i) plane[i] = img.data()[i * 3 + ch];
    for (int i = 0; i < 7; ++i) {
      for (int j = 0; j < 3; ++j) {
        EXPECT_NEAR(out.at(i, j, ch), BilinearOracle(plane, 4, 5, 7, 3, i, j), 1e-6);
      }
    }
  }
}

TEST(ResizeTest, ZeroTargetIsAnArgumentError) {
  EXPECT_THROW(ResizeBilinear(SaliencyMap(2, 2), 0, 3), ArgumentError);
  EXPECT_THROW(ResizeBilinear(ImageTensor(2, 2, 1), 3, 0), ArgumentError);
}

TEST(GaussianTest, KernelRadiusAndNormalization) {
  for (double sigma : {0.3, 1.0, 2.5, 10.0}) {
    const std::vector<double> k = GaussianKernel(sigma);
    EXPECT_EQ(k.size(), 2 * size_t(std::ceil(3 * sigma)) + 1);
    double total = 0.0;
    for (double v : k) total += v;
    EXPECT_NEAR(total, 1.0, 1e-12);
  }
  EXPECT_THROW(GaussianKernel(0.0), ArgumentError);
  EXPECT_THROW(GaussianBlur(ImageTensor(2, 2, 1), -1.0), ArgumentError);
}

TEST(GaussianTest, ConstantImageIsUnchanged) {
  const ImageTensor img(6, 9, 3, 0.37f);
  const ImageTensor out = GaussianBlur(img, 2.0);
  for (float v : out.data()) EXPECT_NEAR(v, 0.37f, 1e-6);
}

TEST(GaussianTest, ImpulsePeakAndMass) {
  ImageTensor img(9, 9, 1);
  img.set(4, 4, 0, 1.0f);
  const ImageTensor out = GaussianBlur(img, 1.0);
  const std::vector<double> k = GaussianKernel(1.0);
  const double peak = k[k.size() / 2];
  EXPECT_NEAR(out.at(4, 4, 0), peak * peak, 1e-6);
  double mass = 0.0;
  for (float v : out.data()) mass += v;
  EXPECT_NEAR(mass, 1.0, 1e-6);
}

TEST(GaussianTest, MatchesDirectConvolutionWithClampedEdges) {
  const struct {
    int h, w, c;
    double sigma;
  } cases[] = {{8, 8, 1, 10.0}, {9, 13, 3, 1.5}, {5, 4, 3, 0.7}, {16, 16, 1, 3.0}};
  uint64_t seed = 40;
  for (const auto& tc : cases) {
    const ImageTensor img = RandomImage(seed++, tc.h, tc.w, tc.c);
    const ImageTensor out = GaussianBlur(img, tc.sigma);
    for (int r = 0; r < tc.h; ++r) {
      for (int c = 0; c < tc.w; ++c) {
        for (int ch = 0; ch < tc.c; ++ch) {
          EXPECT_NEAR(out.at(r, c, ch), BlurOracle(img, tc.sigma, r, c, ch), 1e-6);
        }
      }
    }
  }
}

TEST(GaussianTest, WideBlurOnSmallImageIsNearlyFlat) {
  // With clamped edges a wide kernel weights the border rows heavily, so the
  // result is close to flat but not the plain mean.
  const ImageTensor img = RandomImage(77, 8, 8, 1);
  const ImageTensor out = GaussianBlur(img, 10.0);
  float lo = 1.0f, hi = 0.0f;
  for (float v : out.data()) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  float src_lo = 1.0f, src_hi = 0.0f;
  for (float v : img.data()) {
    src_lo = std::min(src_lo, v);
    src_hi = std::max(src_hi, v);
  }
  EXPECT_LT(hi - lo, 0.1f * (src_hi - src_lo));
}

TEST(MinMaxTest, Examples) {
  const SaliencyMap a = MinMaxNormalize(SaliencyMap(1, 3, std::vector<double>{2, 4, 6}));
  EXPECT_EQ(a[0], 0.0);
  EXPECT_EQ(a[1], 0.5);
  EXPECT_EQ(a[2], 1.0);
  const SaliencyMap b = MinMaxNormalize(SaliencyMap(1, 2, std::vector<double>{5, 5}));
  EXPECT_EQ(b[0], 0.0);
  EXPECT_EQ(b[1], 0.0);
  const SaliencyMap c =
      MinMaxNormalize(SaliencyMap(1, 3, std::vector<double>{-1, 0, 3}));
  EXPECT_EQ(c[0], 0.0);
  EXPECT_EQ(c[1], 0.25);
  EXPECT_EQ(c[2], 1.0);
}

TEST(MinMaxTest, IdempotentOnNonConstantMaps) {
  for (uint64_t seed = 0; seed < 100; ++seed) {
    const SaliencyMap once = MinMaxNormalize(RandomMap(seed, 6, 5, -10, 10));
    const SaliencyMap twice = MinMaxNormalize(once);
    for (size_t i = 0; i < once.size(); ++i) EXPECT_EQ(once[i], twice[i]);
  }
}

TEST(ChannelMeanTest, AveragesChannels) {
  ImageTensor img(1, 2, 3);
  img.set(0, 0, 0, 0.3f);
  img.set(0, 0, 2, 0.6f);
  const SaliencyMap m = ChannelMean(img);
  EXPECT_NEAR(m[0], (0.3 + 0.6) / 3, 1e-7);
  EXPECT_EQ(m[1], 0.0);
}

}  // namespace
}  // namespace iassa
