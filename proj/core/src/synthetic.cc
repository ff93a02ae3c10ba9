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

#include "iassa/synthetic.h"

#include "iassa/error.h"
#include "iassa/rng.h"

namespace iassa {

SyntheticScene MakeTargetScene(uint64_t seed, const SceneOptions& options) {
  if (options.side < 1 || options.channels < 1 || options.target_side < 1 ||
      options.target_side > options.side) {
    throw ArgumentError("invalid synthetic scene options");
  }
  if (!(options.background_max >= 0.0f && options.background_max <= 1.0f) ||
      !(options.target_value >= 0.0f && options.target_value <= 1.0f)) {
    throw ArgumentError("synthetic intensities must lie in [0, 1]");
  }
  Rng rng(seed);
  const int side = options.side;
  const uint64_t span = static_cast<uint64_t>(side - options.target_side) + 1;
  const int top = static_cast<int>(rng.Below(span));
  const int left = static_cast<int>(rng.Below(span));

  SyntheticScene scene{ImageTensor(side, side, options.channels),
                       RegionMask(side, side)};
  std::span<float> px = scene.image.mutable_data();
  for (float& v : px) {
    v = static_cast<float>(rng.Uniform(0.0, options.background_max));
  }
  for (int r = top; r < top + options.target_side; ++r) {
    for (int c = left; c < left + options.target_side; ++c) {
      scene.target.set(r, c, true);
      for (int ch = 0; ch < options.channels; ++ch) {
        scene.image.set(r, c, ch, options.target_value);
      }
    }
  }
  return scene;
}

std::vector<SyntheticScene> MakeSceneSuite(int count, uint64_t seed,
                                           const SceneOptions& options) {
  if (count < 0) throw ArgumentError("scene count must be non-negative");
  Rng seeds(seed);
  std::vector<SyntheticScene> suite;
  suite.reserve(count);
  for (int i = 0; i < count; ++i) {
    suite.push_back(MakeTargetScene(seeds.NextU64(), options));
  }
  return suite;
}

}  // namespace iassa
