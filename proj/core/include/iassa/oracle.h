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

#ifndef IASSA_ORACLE_H_
#define IASSA_ORACLE_H_

#include <cstddef>
#include <functional>
#include <limits>
#include <span>
#include <string_view>
#include <vector>

#include "iassa/attention.h"
#include "iassa/grid.h"
#include "iassa/masking.h"
#include "iassa/saliency.h"

namespace iassa {

enum class ScoreKind { kProbabilities, kLogits };

std::string_view ScoreKindName(ScoreKind kind);
// Throws ProtocolError for anything but "probabilities" or "logits".
ScoreKind ParseScoreKind(std::string_view name);

// The black-box classifier f: images in, one score vector of length c out.
class ScoringOracle {
 public:
  virtual ~ScoringOracle() = default;

  virtual int class_count() const = 0;
  virtual ScoreKind score_kind() const = 0;
  // Number of Score() calls that may run concurrently.
  virtual int capacity() const { return 1; }

  // Returns one score vector per image, in input order.
  virtual std::vector<std::vector<double>> Score(
      std::span<const ImageTensor> images) = 0;
};

// Multi-level feature extractor for the attention operator.
class FeatureProvider {
 public:
  virtual ~FeatureProvider() = default;
  // Four levels, shallow to deep, deterministic per image.
  virtual FeatureLevels Features(const ImageTensor& image) = 0;
};

// score[0] = mean intensity over the hidden target pixels (all channels),
// score[1] = 1 - score[0].
class SyntheticRegionScorer final : public ScoringOracle {
 public:
  explicit SyntheticRegionScorer(RegionMask target);

  int class_count() const override { return 2; }
  ScoreKind score_kind() const override { return ScoreKind::kProbabilities; }
  int capacity() const override { return std::numeric_limits<int>::max(); }
  std::vector<std::vector<double>> Score(
      std::span<const ImageTensor> images) override;

  const RegionMask& target() const { return target_; }

 private:
  RegionMask target_;
};

// score[0] = sum over pixels of w(l) * mean_c I(l, c); a single class.
class LinearProbeScorer final : public ScoringOracle {
 public:
  explicit LinearProbeScorer(SaliencyMap weights);

  int class_count() const override { return 1; }
  ScoreKind score_kind() const override { return ScoreKind::kLogits; }
  int capacity() const override { return std::numeric_limits<int>::max(); }
  std::vector<std::vector<double>> Score(
      std::span<const ImageTensor> images) override;

  const SaliencyMap& weights() const { return weights_; }

 private:
  SaliencyMap weights_;
};

// The same score vector for every input.
class ConstantScorer final : public ScoringOracle {
 public:
  explicit ConstantScorer(double value, int class_count = 1);

  int class_count() const override { return class_count_; }
  ScoreKind score_kind() const override { return ScoreKind::kLogits; }
  int capacity() const override { return std::numeric_limits<int>::max(); }
  std::vector<std::vector<double>> Score(
      std::span<const ImageTensor> images) override;

 private:
  double value_;
  int class_count_;
};

// score[k] = mean intensity of the whole image for every class k.
class MeanIntensityScorer final : public ScoringOracle {
 public:
  explicit MeanIntensityScorer(int class_count = 1);

  int class_count() const override { return class_count_; }
  ScoreKind score_kind() const override { return ScoreKind::kProbabilities; }
  int capacity() const override { return std::numeric_limits<int>::max(); }
  std::vector<std::vector<double>> Score(
      std::span<const ImageTensor> images) override;

 private:
  int class_count_;
};

// Parameter-free pyramid: the input resampled to 1/4, 1/8, 1/16 and 1/32 of
// its size (at least 1 pixel), channels unchanged.
class SyntheticPyramidProvider final : public FeatureProvider {
 public:
  FeatureLevels Features(const ImageTensor& image) override;

  static constexpr int kLevelDivisors[4] = {4, 8, 16, 32};
};

struct BatchOptions {
  size_t batch_size = 256;
  int threads = 1;
};

// Scores `count` lazily built images in batches of batch_size. Within a batch
// up to min(threads, oracle.capacity()) contiguous sub-batches run
// concurrently; results land at their input index. Checks the oracle
// contract: ContractError for wrong result counts or vector lengths,
// NumericError naming the offending index for non-finite scores.
ScoreMatrix ScoreBatched(ScoringOracle& oracle, size_t count,
                         const std::function<ImageTensor(size_t)>& make_image,
                         const BatchOptions& options = {});

}  // namespace iassa

#endif  // IASSA_ORACLE_H_
