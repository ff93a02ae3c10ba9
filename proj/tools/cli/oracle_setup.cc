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

#include "oracle_setup.h"

#include <charconv>
#include <utility>

#include "iassa/error.h"
#include "iassa/image_io.h"

namespace iassa::cli {
namespace {

constexpr float kBrightTarget = 0.9f;

std::string BuiltinArg(const OracleDescriptor& d) {
  return d.args.empty() ? std::string() : d.args.front();
}

double ParseNumber(const std::string& text, const std::string& what) {
  double value = 0.0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), value);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size()) {
    throw ArgumentError("cannot parse " + what + " '" + text + "'");
  }
  return value;
}

RegionMask BrightRegion(const ImageTensor& image) {
  const SaliencyMap mean = ChannelMean(image);
  RegionMask region(image.height(), image.width());
  for (int r = 0; r < image.height(); ++r) {
    for (int c = 0; c < image.width(); ++c) {
      if (mean.at(r, c) >= kBrightTarget) region.set(r, c, true);
    }
  }
  return region;
}

std::shared_ptr<ScoringOracle> OpenBuiltin(const OracleDescriptor& d,
                                           const ImageTensor& image) {
  const std::string arg = BuiltinArg(d);
  if (d.target == "region") {
    RegionMask target = arg.empty() ? BrightRegion(image) : LoadRegionMask(arg);
    if (target.height() != image.height() || target.width() != image.width()) {
      throw ArgumentError("region mask is " + std::to_string(target.height()) +
                          "x" + std::to_string(target.width()) +
                          " but the image is " + std::to_string(image.height()) +
                          "x" + std::to_string(image.width()));
    }
    if (target.empty()) {
      throw ArgumentError(
          "builtin:region found no target pixels; pass builtin:region=<mask>");
    }
    return std::make_shared<SyntheticRegionScorer>(std::move(target));
  }
  if (d.target == "mean") {
    const int classes =
        arg.empty() ? 1 : static_cast<int>(ParseNumber(arg, "class count"));
    if (classes < 1) throw ArgumentError("builtin:mean needs at least one class");
    return std::make_shared<MeanIntensityScorer>(classes);
  }
  if (d.target == "constant") {
    return std::make_shared<ConstantScorer>(
        arg.empty() ? 1.0 : ParseNumber(arg, "constant score"));
  }
  if (d.target == "linear") {
    if (arg.empty()) throw ArgumentError("builtin:linear needs =<weights file>");
    SaliencyMap weights = LoadSaliency(arg);
    if (weights.height() != image.height() || weights.width() != image.width()) {
      weights = ResizeBilinear(weights, image.height(), image.width());
    }
    return std::make_shared<LinearProbeScorer>(std::move(weights));
  }
  throw ArgumentError("unknown builtin oracle '" + d.target + "'");
}

}  // namespace

OracleHandle OpenOracle(std::string_view descriptor, const ImageTensor& image,
                        std::chrono::milliseconds timeout) {
  const OracleDescriptor d = ParseOracleDescriptor(descriptor);
  OracleHandle handle;
  handle.descriptor = d.text;
  if (d.kind == OracleDescriptor::Kind::kBuiltin) {
    handle.scorer = OpenBuiltin(d, image);
  } else {
    handle.endpoint = ConnectEndpoint(d, timeout);
    handle.scorer = std::make_shared<WireScoringOracle>(handle.endpoint);
  }
  return handle;
}

std::shared_ptr<FeatureProvider> OpenFeatures(std::string_view descriptor,
                                              const OracleHandle& oracle,
                                              std::chrono::milliseconds timeout,
                                              std::string* resolved) {
  auto report = [&](std::string name) {
    if (resolved) *resolved = std::move(name);
  };
  if (descriptor.empty()) {
    if (oracle.endpoint && oracle.endpoint->Handshake().feature_dims) {
      report(oracle.descriptor);
      return std::make_shared<WireFeatureProvider>(oracle.endpoint);
    }
    report("builtin:pyramid");
    return std::make_shared<SyntheticPyramidProvider>();
  }
  const OracleDescriptor d = ParseOracleDescriptor(descriptor);
  report(d.text);
  if (d.kind == OracleDescriptor::Kind::kBuiltin) {
    if (d.target != "pyramid") {
      throw ArgumentError("unknown builtin feature provider '" + d.target + "'");
    }
    return std::make_shared<SyntheticPyramidProvider>();
  }
  if (oracle.endpoint && d.text == oracle.descriptor) {
    return std::make_shared<WireFeatureProvider>(oracle.endpoint);
  }
  return std::make_shared<WireFeatureProvider>(ConnectEndpoint(d, timeout));
}

}  // namespace iassa::cli
