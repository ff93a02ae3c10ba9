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

#ifndef IASSA_SYNTHETIC_H_
#define IASSA_SYNTHETIC_H_

#include <cstdint>
#include <vector>

#include "iassa/grid.h"
#include "iassa/masking.h"

namespace iassa {

// A dim textured background with one bright square target.
struct SyntheticScene {
  ImageTensor image;
  RegionMask target;
};

struct SceneOptions {
  int side = 64;
  int target_side = 24;
  int channels = 3;
  // Background intensities are drawn from [0, background_max].
  float background_max = 0.4f;
  float target_value = 1.0f;
};

SyntheticScene MakeTargetScene(uint64_t seed, const SceneOptions& options = {});

// `count` scenes with seeds derived from `seed`.
std::vector<SyntheticScene> MakeSceneSuite(int count, uint64_t seed,
                                           const SceneOptions& options = {});

}  // namespace iassa

#endif  // IASSA_SYNTHETIC_H_
