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

#ifndef IASSA_WIRE_SERVER_H_
#define IASSA_WIRE_SERVER_H_

#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "iassa/oracle.h"
#include "iassa/wire.h"

namespace iassa {

// Deliberate protocol violations, used to exercise client-side checks.
enum class ServerFault {
  kNone,
  kExtraScore,      // one more score than class_count
  kShortScore,      // one fewer score than class_count
  kMissingLevel,    // three levels instead of four
  kWrongLevelDims,  // first level one row taller than declared
  kNoScoreKind,     // handshake without score_kind
  kBadVersion,      // handshake declares v = 2
  kMalformed,       // responses that are not JSON
  kWrongId,         // responses carry id + 1
  kNanScore,        // first score is NaN (encoded as null)
};

ServerFault ParseServerFault(std::string_view name);

// Serves an in-process oracle (and optional feature provider) over the
// protocol. Feature dims are declared in the handshake when `declared_input`
// is given, computed by running the provider on a blank image of that shape.
class ProtocolServer {
 public:
  ProtocolServer(std::shared_ptr<ScoringOracle> oracle,
                 std::shared_ptr<FeatureProvider> features,
                 std::optional<Shape3> declared_input,
                 ServerFault fault = ServerFault::kNone);

  // Answers one request line. Never throws: failures become ok:false.
  std::string Handle(std::string_view request_line);

  // Handles a newline-separated batch; one output line per input line.
  std::string HandleBody(std::string_view body);

  // Reads requests from `in` until EOF, writing and flushing one response
  // per request.
  void ServeStream(std::istream& in, std::ostream& out);

 private:
  std::shared_ptr<ScoringOracle> oracle_;
  std::shared_ptr<FeatureProvider> features_;
  std::optional<std::vector<Shape3>> feature_dims_;
  ServerFault fault_;
};

}  // namespace iassa

#endif  // IASSA_WIRE_SERVER_H_
