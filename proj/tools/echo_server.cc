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

// Serves an in-process scorer and the pyramid feature provider over the
// NDJSON protocol, on stdio or HTTP. Optional fault injection exercises
// client-side protocol checks.

#include <cstdio>
#include <iostream>
#include <memory>
#include <string>

#include <CLI11.hpp>

#include "iassa/error.h"
#include "iassa/image_io.h"
#include "iassa/oracle.h"
#include "iassa/synthetic.h"
#include "iassa/wire_server.h"

// After Eigen: <resolv.h>, pulled in here, defines a `_res` macro.
#include <httplib.h>

namespace {

struct Options {
  std::string scorer = "region";
  uint64_t scene_seed = 0;
  std::string target;
  std::string weights;
  int side = 64;
  int channels = 3;
  int classes = 1;
  double value = 1.0;
  std::string fault = "none";
  bool no_features = false;
  int http_port = -1;
  std::string host = "127.0.0.1";
};

std::shared_ptr<iassa::ScoringOracle> MakeScorer(const Options& o) {
  if (o.scorer == "region") {
    iassa::RegionMask target;
    if (o.target.empty()) {
      iassa::SceneOptions scene;
      scene.side = o.side;
      scene.channels = o.channels;
      target = iassa::MakeTargetScene(o.scene_seed, scene).target;
    } else {
      target = iassa::LoadRegionMask(o.target);
    }
    return std::make_shared<iassa::SyntheticRegionScorer>(std::move(target));
  }
  if (o.scorer == "mean") return std::make_shared<iassa::MeanIntensityScorer>(o.classes);
  if (o.scorer == "constant") {
    return std::make_shared<iassa::ConstantScorer>(o.value, o.classes);
  }
  if (o.scorer == "linear") {
    return std::make_shared<iassa::LinearProbeScorer>(iassa::LoadSaliency(o.weights));
  }
  throw iassa::ArgumentError("unknown scorer '" + o.scorer + "'");
}

}  // namespace

int main(int argc, char** argv) {
  Options o;
  CLI::App app{"NDJSON protocol server for builtin scorers", "iassa_echo_server"};
  app.add_option("--scorer", o.scorer, "region, mean, constant or linear");
  app.add_option("--scene-seed", o.scene_seed,
                 "region: take the target of the synthetic scene with this seed");
  app.add_option("--target", o.target, "region: target mask image");
  app.add_option("--weights", o.weights, "linear: weight map (SMAP or CSV)");
  app.add_option("--side", o.side, "Declared input side")->check(CLI::PositiveNumber);
  app.add_option("--channels", o.channels, "Declared input channels")
      ->check(CLI::PositiveNumber);
  app.add_option("--classes", o.classes, "mean/constant: class count")
      ->check(CLI::PositiveNumber);
  app.add_option("--value", o.value, "constant: the score");
  app.add_option("--fault", o.fault, "Protocol violation to inject");
  app.add_flag("--no-features", o.no_features, "Do not serve feature requests");
  app.add_option("--http", o.http_port,
                 "Serve HTTP on this port instead of stdio (0 picks a free port)");
  app.add_option("--host", o.host, "HTTP bind address");
  CLI11_PARSE(app, argc, argv);

  try {
    std::shared_ptr<iassa::FeatureProvider> features;
    std::optional<iassa::Shape3> declared;
    if (!o.no_features) {
      features = std::make_shared<iassa::SyntheticPyramidProvider>();
      declared = iassa::Shape3{o.side, o.side, o.channels};
    }
    iassa::ProtocolServer server(MakeScorer(o), features, declared,
                                 iassa::ParseServerFault(o.fault));
    if (o.http_port < 0) {
      std::ios::sync_with_stdio(false);
      server.ServeStream(std::cin, std::cout);
      return 0;
    }
    httplib::Server http;
    http.Post("/v1", [&](const httplib::Request& req, httplib::Response& res) {
      res.set_content(server.HandleBody(req.body), "application/x-ndjson");
    });
    const int port = o.http_port == 0 ? http.bind_to_any_port(o.host)
                                      : (http.bind_to_port(o.host, o.http_port)
                                             ? o.http_port
                                             : -1);
    if (port < 0) {
      std::cerr << "cannot bind " << o.host << ":" << o.http_port << "\n";
      return 1;
    }
    std::cout << "listening on " << o.host << ":" << port << std::endl;
    return http.listen_after_bind() ? 0 : 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
