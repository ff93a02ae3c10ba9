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

#include "iassa/oracle.h"

#include <algorithm>
#include <cmath>
#include <string>

#include "iassa/error.h"
#include "iassa/parallel.h"

namespace iassa {

std::string_view ScoreKindName(ScoreKind kind) {
  return kind == ScoreKind::kProbabilities ? "probabilities" : "logits";
}

ScoreKind ParseScoreKind(std::string_view name) {
  if (name == "probabilities") return ScoreKind::kProbabilities;
  if (name == "logits") return ScoreKind::kLogits;
  throw ProtocolError("unknown score_kind '" + std::string(name) + "'");
}

SyntheticRegionScorer::SyntheticRegionScorer(RegionMask target)
    : target_(std::move(target)) {
  if (target_.empty()) throw ArgumentError("synthetic target region is empty");
}

std::vector<std::vector<double>> SyntheticRegionScorer::Score(
    std::span<const ImageTensor> images) {
  std::vector<std::vector<double>> out;
  out.reserve(images.size());
  for (const ImageTensor& image : images) {
    if (image.height() != target_.height() || image.width() != target_.width()) {
      throw ArgumentError("image does not match the synthetic target size");
    }
    const int ch = image.channels();
    const auto data = image.data();
    double acc = 0.0;
    const auto bits = target_.bits();
    for (size_t p = 0; p < bits.size(); ++p) {
      if (!bits[p]) continue;
      for (int k = 0; k < ch; ++k) acc += data[p * ch + k];
    }
    const double score =
        acc / (static_cast<double>(target_.count()) * static_cast<double>(ch));
    out.push_back({score, 1.0 - score});
  }
  return out;
}

LinearProbeScorer::LinearProbeScorer(SaliencyMap weights)
    : weights_(std::move(weights)) {}

std::vector<std::vector<double>> LinearProbeScorer::Score(
    std::span<const ImageTensor> images) {
  std::vector<std::vector<double>> out;
  out.reserve(images.size());
  for (const ImageTensor& image : images) {
    if (image.height() != weights_.height() || image.width() != weights_.width()) {
      throw ArgumentError("image does not match the probe weights");
    }
    const int ch = image.channels();
    const auto data = image.data();
    double acc = 0.0;
    for (size_t p = 0; p < weights_.size(); ++p) {
      double pixel = 0.0;
      for (int k = 0; k < ch; ++k) pixel += data[p * ch + k];
      acc += weights_[p] * (pixel / ch);
    }
    out.push_back({acc});
  }
  return out;
}

ConstantScorer::ConstantScorer(double value, int class_count)
    : value_(value), class_count_(class_count) {
  if (class_count < 1) throw ArgumentError("class count must be positive");
}

std::vector<std::vector<double>> ConstantScorer::Score(
    std::span<const ImageTensor> images) {
  return std::vector<std::vector<double>>(
      images.size(), std::vector<double>(class_count_, value_));
}

MeanIntensityScorer::MeanIntensityScorer(int class_count)
    : class_count_(class_count) {
  if (class_count < 1) throw ArgumentError("class count must be positive");
}

std::vector<std::vector<double>> MeanIntensityScorer::Score(
    std::span<const ImageTensor> images) {
  std::vector<std::vector<double>> out;
  out.reserve(images.size());
  for (const ImageTensor& image : images) {
    double acc = 0.0;
    for (float v : image.data()) acc += v;
    const double mean = acc / static_cast<double>(image.data().size());
    out.emplace_back(class_count_, mean);
  }
  return out;
}

FeatureLevels SyntheticPyramidProvider::Features(const ImageTensor& image) {
  FeatureLevels levels;
  levels.reserve(4);
  std::vector<double> source(image.data().begin(), image.data().end());
  for (int divisor : kLevelDivisors) {
    const int h = std::max(1, image.height() / divisor);
    const int w = std::max(1, image.width() / divisor);
    levels.emplace_back(h, w, image.channels(),
                        ResizeBilinear(source, image.height(), image.width(),
                                       image.channels(), h, w));
  }
  return levels;
}

ScoreMatrix ScoreBatched(ScoringOracle& oracle, size_t count,
                         const std::function<ImageTensor(size_t)>& make_image,
                         const BatchOptions& options) {
  const int classes = oracle.class_count();
  if (classes < 1) throw ContractError("oracle declares no classes");
  ScoreMatrix scores(count, classes);
  const size_t batch = std::max<size_t>(1, options.batch_size);
  const int lanes = std::max(1, std::min(options.threads, oracle.capacity()));

  for (size_t start = 0; start < count; start += batch) {
    const size_t size = std::min(batch, count - start);
    ParallelFor(size, lanes, [&](size_t begin, size_t end) {
      std::vector<ImageTensor> images;
      images.reserve(end - begin);
      for (size_t i = begin; i < end; ++i) images.push_back(make_image(start + i));
      const std::vector<std::vector<double>> result = oracle.Score(images);
      if (result.size() != images.size()) {
        throw ContractError("oracle returned " + std::to_string(result.size()) +
                            " score vectors for " +
                            std::to_string(images.size()) + " images");
      }
      for (size_t i = 0; i < result.size(); ++i) {
        const size_t index = start + begin + i;
        if (static_cast<int>(result[i].size()) != classes) {
          throw ContractError("score vector for image " + std::to_string(index) +
                              " has length " + std::to_string(result[i].size()) +
                              ", expected " + std::to_string(classes));
        }
        for (int k = 0; k < classes; ++k) {
          if (!std::isfinite(result[i][k])) {
            throw NumericError("non-finite score for mask " + std::to_string(index));
          }
          scores.at(index, k) = result[i][k];
        }
      }
    });
  }
  return scores;
}

}  // namespace iassa
