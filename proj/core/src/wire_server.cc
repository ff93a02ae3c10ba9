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

#include "iassa/wire_server.h"

#include <istream>
#include <limits>
#include <ostream>
#include <string>

#include "iassa/error.h"

namespace iassa {
namespace {

using nlohmann::json;

std::string Failure(const json& id, const std::string& message) {
  return json{{"id", id}, {"ok", false}, {"error", message}}.dump();
}

ImageTensor DecodeImage(const json& doc) {
  if (!doc.contains("shape") || !doc["shape"].is_array() ||
      doc["shape"].size() != 3) {
    throw ArgumentError("request needs shape [H, W, C]");
  }
  const json& shape = doc["shape"];
  for (const json& v : shape) {
    if (!v.is_number_integer() || v.get<int64_t>() < 1 || v.get<int64_t>() > (1 << 16)) {
      throw ArgumentError("shape entries must be positive integers");
    }
  }
  if (doc.value("dtype", std::string("f32le")) != "f32le") {
    throw ArgumentError("only dtype f32le is supported");
  }
  if (!doc.contains("data") || !doc["data"].is_string()) {
    throw ArgumentError("request needs base64 data");
  }
  const int h = shape[0].get<int>();
  const int w = shape[1].get<int>();
  const int c = shape[2].get<int>();
  std::vector<float> data = DecodeF32Base64(
      doc["data"].get<std::string>(), static_cast<size_t>(h) * w * c);
  return ImageTensor(h, w, c, std::move(data));
}

json EncodeLevel(const FeatureGrid& level) {
  return json{{"shape", {level.height(), level.width(), level.channels()}},
              {"data", EncodeF32Base64(level.data())}};
}

}  // namespace

ServerFault ParseServerFault(std::string_view name) {
  if (name == "none") return ServerFault::kNone;
  if (name == "extra-score") return ServerFault::kExtraScore;
  if (name == "short-score") return ServerFault::kShortScore;
  if (name == "missing-level") return ServerFault::kMissingLevel;
  if (name == "wrong-level-dims") return ServerFault::kWrongLevelDims;
  if (name == "no-score-kind") return ServerFault::kNoScoreKind;
  if (name == "bad-version") return ServerFault::kBadVersion;
  if (name == "malformed") return ServerFault::kMalformed;
  if (name == "wrong-id") return ServerFault::kWrongId;
  if (name == "nan-score") return ServerFault::kNanScore;
  throw ArgumentError("unknown server fault '" + std::string(name) + "'");
}

ProtocolServer::ProtocolServer(std::shared_ptr<ScoringOracle> oracle,
                               std::shared_ptr<FeatureProvider> features,
                               std::optional<Shape3> declared_input,
                               ServerFault fault)
    : oracle_(std::move(oracle)), features_(std::move(features)), fault_(fault) {
  if (!oracle_) throw ArgumentError("protocol server needs a scoring oracle");
  if (features_ && declared_input) {
    const ImageTensor blank((*declared_input)[0], (*declared_input)[1],
                            (*declared_input)[2], 0.0f);
    std::vector<Shape3> dims;
    for (const FeatureGrid& level : features_->Features(blank)) {
      dims.push_back({level.height(), level.width(), level.channels()});
    }
    feature_dims_ = std::move(dims);
  }
}

std::string ProtocolServer::Handle(std::string_view request_line) {
  if (fault_ == ServerFault::kMalformed) return "this is not json {";
  json request = json::parse(request_line, nullptr, /*allow_exceptions=*/false);
  if (request.is_discarded() || !request.is_object()) {
    return Failure(nullptr, "malformed request");
  }
  json id = request.contains("id") ? request["id"] : json(nullptr);
  if (fault_ == ServerFault::kWrongId && id.is_number_unsigned()) {
    id = id.get<uint64_t>() + 1;
  }
  if (request.value("v", 0) != kProtocolVersion) {
    return Failure(id, "unsupported protocol version");
  }
  const std::string op = request.value("op", std::string());
  try {
    if (op == "handshake") {
      json reply = {{"id", id},
                    {"ok", true},
                    {"v", fault_ == ServerFault::kBadVersion ? kProtocolVersion + 1
                                                             : kProtocolVersion},
                    {"class_count", oracle_->class_count()}};
      if (fault_ != ServerFault::kNoScoreKind) {
        reply["score_kind"] = ScoreKindName(oracle_->score_kind());
      }
      if (feature_dims_) {
        json dims = json::array();
        for (const Shape3& s : *feature_dims_) dims.push_back({s[0], s[1], s[2]});
        reply["feature_dims"] = dims;
      }
      return reply.dump();
    }
    if (op == "score") {
      const ImageTensor image = DecodeImage(request);
      std::vector<double> scores =
          oracle_->Score(std::span<const ImageTensor>(&image, 1)).at(0);
      if (fault_ == ServerFault::kExtraScore) scores.push_back(0.0);
      if (fault_ == ServerFault::kShortScore && !scores.empty()) scores.pop_back();
      if (fault_ == ServerFault::kNanScore && !scores.empty()) {
        scores[0] = std::numeric_limits<double>::quiet_NaN();
      }
      return json{{"id", id}, {"ok", true}, {"scores", scores}}.dump();
    }
    if (op == "features") {
      if (!features_) return Failure(id, "this server provides no features");
      const ImageTensor image = DecodeImage(request);
      FeatureLevels levels = features_->Features(image);
      if (fault_ == ServerFault::kMissingLevel) levels.pop_back();
      if (fault_ == ServerFault::kWrongLevelDims) {
        const FeatureGrid& first = levels[0];
        levels[0] = FeatureGrid(
            first.height() + 1, first.width(), first.channels(),
            ResizeBilinear(first.data(), first.height(), first.width(),
                           first.channels(), first.height() + 1, first.width()));
      }
      json encoded = json::array();
      for (const FeatureGrid& level : levels) encoded.push_back(EncodeLevel(level));
      return json{{"id", id}, {"ok", true}, {"levels", encoded}}.dump();
    }
    return Failure(id, "unknown op '" + op + "'");
  } catch (const std::exception& e) {
    return Failure(id, e.what());
  }
}

std::string ProtocolServer::HandleBody(std::string_view body) {
  std::string out;
  size_t pos = 0;
  while (pos < body.size()) {
    size_t end = body.find('\n', pos);
    if (end == std::string_view::npos) end = body.size();
    std::string_view line = body.substr(pos, end - pos);
    pos = end + 1;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) continue;
    out += Handle(line);
    out += '\n';
  }
  return out;
}

void ProtocolServer::ServeStream(std::istream& in, std::ostream& out) {
  for (std::string line; std::getline(in, line);) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    out << Handle(line) << '\n';
    out.flush();
  }
}

}  // namespace iassa
