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

#ifndef IASSA_TOOLS_CLI_ORACLE_SETUP_H_
#define IASSA_TOOLS_CLI_ORACLE_SETUP_H_

#include <chrono>
#include <memory>
#include <string>
#include <string_view>

#include "iassa/grid.h"
#include "iassa/oracle.h"
#include "iassa/wire.h"

namespace iassa::cli {

struct OracleHandle {
  std::shared_ptr<ScoringOracle> scorer;
  // Set for exec: and http: descriptors.
  std::shared_ptr<WireEndpoint> endpoint;
  std::string descriptor;
};

// Builtin oracles, configured against the image being explained:
//   builtin:region[=<mask>]  two-class target scorer; without a mask file
//                            the target is every pixel with channel mean
//                            >= 0.9
//   builtin:mean[=<classes>] mean intensity
//   builtin:constant[=<v>]   the same score for every input
//   builtin:linear=<map>     weighted sum with a saliency file as weights
OracleHandle OpenOracle(std::string_view descriptor, const ImageTensor& image,
                        std::chrono::milliseconds timeout);

// "builtin:pyramid", an exec:/http: descriptor, or empty. Empty picks the
// oracle's own endpoint when its handshake declares feature dims, and the
// pyramid otherwise.
std::shared_ptr<FeatureProvider> OpenFeatures(std::string_view descriptor,
                                              const OracleHandle& oracle,
                                              std::chrono::milliseconds timeout,
                                              std::string* resolved = nullptr);

}  // namespace iassa::cli

#endif  // IASSA_TOOLS_CLI_ORACLE_SETUP_H_
