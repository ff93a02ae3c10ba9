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

#ifndef IASSA_WIRE_H_
#define IASSA_WIRE_H_

#include <array>
#include <atomic>
#include <chrono>
#include <cstdint>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "iassa/attention.h"
#include "iassa/grid.h"
#include "iassa/oracle.h"

namespace iassa {

// NDJSON protocol, version 1. One JSON document per line.
//
//   -> {"v":1,"id":7,"op":"handshake"}
//   <- {"id":7,"ok":true,"v":1,"class_count":1000,
//       "score_kind":"probabilities","feature_dims":[[56,56,256],...]}
//   -> {"v":1,"id":8,"op":"score","shape":[H,W,C],"dtype":"f32le",
//       "data":"<base64>"}
//   <- {"id":8,"ok":true,"scores":[...]}
//   -> {"v":1,"id":9,"op":"features","shape":[H,W,C],"dtype":"f32le",
//       "data":"<base64>"}
//   <- {"id":9,"ok":true,"levels":[{"shape":[h,w,c],"data":"..."},x4]}
//   <- {"id":9,"ok":false,"error":"..."}
//
// A batch is a run of score requests; responses come back in request order.
// feature_dims is optional and, when present, pins the level shapes every
// features response must carry.
inline constexpr int kProtocolVersion = 1;

using Shape3 = std::array<int, 3>;

struct Capabilities {
  int class_count = 0;
  ScoreKind score_kind = ScoreKind::kProbabilities;
  std::optional<std::vector<Shape3>> feature_dims;

  friend bool operator==(const Capabilities&, const Capabilities&) = default;
};

// Little-endian binary32 values as standard base64.
std::string EncodeF32Base64(std::span<const float> values);
std::string EncodeF32Base64(std::span<const double> values);
// Throws ProtocolError on bad base64 or when the payload does not hold
// exactly `expected_count` floats.
std::vector<float> DecodeF32Base64(std::string_view text,
                                   size_t expected_count);

std::string HandshakeRequest(uint64_t id);
std::string ScoreRequest(uint64_t id, const ImageTensor& image);
std::string FeaturesRequest(uint64_t id, const ImageTensor& image);

// Response parsers. All of them check the id and the "ok" flag and throw
// ProtocolError for malformed messages, RemoteError for ok:false and
// ContractError for messages that disagree with the declared capabilities.
Capabilities ParseHandshakeResponse(std::string_view line, uint64_t id);
std::vector<double> ParseScoreResponse(std::string_view line, uint64_t id,
                                       int class_count);
FeatureLevels ParseFeaturesResponse(std::string_view line, uint64_t id,
                                    const Capabilities& caps);

nlohmann::json CapabilitiesToJson(const Capabilities& caps);

// Moves batches of request lines to a server and returns its response lines.
class Transport {
 public:
  virtual ~Transport() = default;
  // Sends every line and returns exactly one response line per request.
  virtual std::vector<std::string> Exchange(
      std::span<const std::string> requests) = 0;
  // Number of Exchange calls that may be in flight at once.
  virtual int capacity() const = 0;
  virtual std::string Describe() const = 0;
};

// Child process speaking the protocol over stdin/stdout. Strictly serial.
class SubprocessTransport final : public Transport {
 public:
  // argv[0] is the executable path. Throws TransportError when it cannot be
  // started.
  SubprocessTransport(std::vector<std::string> argv,
                      std::chrono::milliseconds timeout);
  ~SubprocessTransport() override;

  SubprocessTransport(const SubprocessTransport&) = delete;
  SubprocessTransport& operator=(const SubprocessTransport&) = delete;

  std::vector<std::string> Exchange(
      std::span<const std::string> requests) override;
  int capacity() const override { return 1; }
  std::string Describe() const override;

 private:
  void Shutdown();

  std::vector<std::string> argv_;
  std::chrono::milliseconds timeout_;
  int pid_ = -1;
  int to_child_ = -1;
  int from_child_ = -1;
  std::string read_buffer_;
  std::mutex mu_;
};

// The same messages POSTed as an NDJSON body; the reply body holds the
// response lines.
class HttpTransport final : public Transport {
 public:
  // url: "http://host:port[/path]"; the path defaults to "/v1".
  HttpTransport(std::string_view url, std::chrono::milliseconds timeout,
                int max_in_flight = 4);

  std::vector<std::string> Exchange(
      std::span<const std::string> requests) override;
  int capacity() const override { return max_in_flight_; }
  std::string Describe() const override;

 private:
  std::string host_;
  int port_ = 80;
  std::string path_;
  std::chrono::milliseconds timeout_;
  int max_in_flight_;
};

// A protocol peer with cached capabilities.
class WireEndpoint {
 public:
  explicit WireEndpoint(std::unique_ptr<Transport> transport);

  // Runs the handshake once and caches the result; later calls return the
  // cached capabilities.
  const Capabilities& Handshake();

  std::vector<std::vector<double>> ScoreBatch(
      std::span<const ImageTensor> images);
  FeatureLevels Features(const ImageTensor& image);

  int capacity() const { return transport_->capacity(); }
  std::string Describe() const { return transport_->Describe(); }

 private:
  uint64_t NextId() { return next_id_.fetch_add(1); }

  std::unique_ptr<Transport> transport_;
  std::atomic<uint64_t> next_id_{1};
  std::mutex handshake_mu_;
  std::optional<Capabilities> caps_;
};

class WireScoringOracle final : public ScoringOracle {
 public:
  explicit WireScoringOracle(std::shared_ptr<WireEndpoint> endpoint);

  int class_count() const override { return caps_.class_count; }
  ScoreKind score_kind() const override { return caps_.score_kind; }
  int capacity() const override { return endpoint_->capacity(); }
  std::vector<std::vector<double>> Score(
      std::span<const ImageTensor> images) override;

 private:
  std::shared_ptr<WireEndpoint> endpoint_;
  Capabilities caps_;
};

class WireFeatureProvider final : public FeatureProvider {
 public:
  explicit WireFeatureProvider(std::shared_ptr<WireEndpoint> endpoint);
  FeatureLevels Features(const ImageTensor& image) override;

 private:
  std::shared_ptr<WireEndpoint> endpoint_;
};

// Oracle descriptors: "builtin:<name>[=<arg>]", "exec:<path> [args...]",
// "http://host:port[/path]" or "http:<host:port[/path]>".
struct OracleDescriptor {
  enum class Kind { kBuiltin, kExec, kHttp };
  Kind kind = Kind::kBuiltin;
  // builtin: the name; exec: argv[0]; http: the URL.
  std::string target;
  // builtin: the optional "=<arg>" part; exec: trailing arguments.
  std::vector<std::string> args;
  std::string text;
};

// Throws ArgumentError for unknown schemes or empty targets.
OracleDescriptor ParseOracleDescriptor(std::string_view text);

// Connects to an exec: or http: descriptor and completes the handshake.
std::shared_ptr<WireEndpoint> ConnectEndpoint(
    const OracleDescriptor& descriptor,
    std::chrono::milliseconds timeout = std::chrono::seconds(30));

}  // namespace iassa

#endif  // IASSA_WIRE_H_
