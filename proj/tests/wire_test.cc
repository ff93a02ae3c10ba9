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

#include "iassa/wire.h"

#include <chrono>
#include <cmath>
#include <memory>
#include <string>
#include <thread>
#include <vector>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include "iassa/engine.h"
#include "iassa/error.h"
#include "iassa/oracle.h"
#include "iassa/synthetic.h"
#include "iassa/wire_server.h"
#include "test_support.h"

// After Eigen: <resolv.h> defines a _res macro that clashes with it.
#include <httplib.h>

namespace iassa {
namespace {

using namespace std::chrono_literals;
using testing::RandomImage;

constexpr int kSide = 32;
constexpr uint64_t kSceneSeed = 3;

std::string EchoServer() { return IASSA_ECHO_SERVER_PATH; }

std::shared_ptr<WireEndpoint> Exec(const std::vector<std::string>& args,
                                   std::chrono::milliseconds timeout = 10s) {
  std::string text = "exec:" + EchoServer() + " --side " + std::to_string(kSide);
  for (const std::string& a : args) text += " " + a;
  return ConnectEndpoint(ParseOracleDescriptor(text), timeout);
}

SceneOptions Scene() {
  SceneOptions o;
  o.side = kSide;
  return o;
}

TEST(Base64Test, RoundTripsExactFloats) {
  const std::vector<float> values{0.0f, -1.5f, 3.25e-20f, 1e30f, 0.1f};
  const std::string text = EncodeF32Base64(std::span<const float>(values));
  EXPECT_EQ(text.size() % 4, 0u);
  EXPECT_EQ(DecodeF32Base64(text, values.size()), values);
  EXPECT_THROW(DecodeF32Base64(text, values.size() + 1), ProtocolError);
  EXPECT_THROW(DecodeF32Base64("abc", 0), ProtocolError);
  EXPECT_THROW(DecodeF32Base64("!!!!", 1), ProtocolError);
}

TEST(Base64Test, KnownEncoding) {
  // 1.0f is 00 00 80 3f little-endian.
  const std::vector<float> one{1.0f};
  EXPECT_EQ(EncodeF32Base64(std::span<const float>(one)), "AACAPw==");
}

TEST(HandshakeTest, ParsesCapabilities) {
  const Capabilities caps = ParseHandshakeResponse(
      R"({"id":4,"ok":true,"v":1,"class_count":3,"score_kind":"logits",)"
      R"("feature_dims":[[8,8,2],[4,4,2],[2,2,2],[1,1,2]]})",
      4);
  EXPECT_EQ(caps.class_count, 3);
  EXPECT_EQ(caps.score_kind, ScoreKind::kLogits);
  ASSERT_TRUE(caps.feature_dims.has_value());
  EXPECT_EQ((*caps.feature_dims)[1], (Shape3{4, 4, 2}));
  const nlohmann::json j = CapabilitiesToJson(caps);
  EXPECT_EQ(j["class_count"], 3);
}

TEST(HandshakeTest, RejectsViolations) {
  EXPECT_THROW(ParseHandshakeResponse(R"({"id":1,"ok":true,"v":1,"class_count":3})", 1),
               ProtocolError);
  EXPECT_THROW(ParseHandshakeResponse(
                   R"({"id":1,"ok":true,"v":2,"class_count":3,"score_kind":"logits"})", 1),
               ProtocolError);
  EXPECT_THROW(ParseHandshakeResponse(
                   R"({"id":2,"ok":true,"v":1,"class_count":3,"score_kind":"logits"})", 1),
               ProtocolError);
  EXPECT_THROW(ParseHandshakeResponse("{", 1), ProtocolError);
  EXPECT_THROW(ParseHandshakeResponse(R"({"id":1,"ok":false,"error":"boom"})", 1),
               RemoteError);
}

TEST(ScoreResponseTest, ChecksLength) {
  EXPECT_EQ(ParseScoreResponse(R"({"id":7,"ok":true,"scores":[0.5,0.25]})", 7, 2),
            (std::vector<double>{0.5, 0.25}));
  EXPECT_THROW(ParseScoreResponse(R"({"id":7,"ok":true,"scores":[0.5]})", 7, 2),
               ContractError);
  EXPECT_THROW(ParseScoreResponse(R"({"id":7,"ok":true,"scores":[0.5,"x"]})", 7, 2),
               ProtocolError);
}

TEST(ScoreRequestTest, CarriesShapeAndPayload) {
  const ImageTensor image = RandomImage(1, 2, 3, 1);
  const nlohmann::json j = nlohmann::json::parse(ScoreRequest(9, image));
  EXPECT_EQ(j["id"], 9);
  EXPECT_EQ(j["op"], "score");
  EXPECT_EQ(j["shape"], nlohmann::json::array({2, 3, 1}));
  const std::vector<float> data = DecodeF32Base64(j["data"].get<std::string>(), 6);
  EXPECT_TRUE(std::equal(data.begin(), data.end(), image.data().begin()));
}

TEST(DescriptorTest, ParsesKinds) {
  const OracleDescriptor b = ParseOracleDescriptor("builtin:constant=0.5");
  EXPECT_EQ(b.kind, OracleDescriptor::Kind::kBuiltin);
  EXPECT_EQ(b.target, "constant");
  EXPECT_EQ(b.args, std::vector<std::string>{"0.5"});
  const OracleDescriptor e = ParseOracleDescriptor("exec:/bin/tool --a 1");
  EXPECT_EQ(e.kind, OracleDescriptor::Kind::kExec);
  EXPECT_EQ(e.target, "/bin/tool");
  EXPECT_EQ(e.args, (std::vector<std::string>{"--a", "1"}));
  const OracleDescriptor h = ParseOracleDescriptor("http:localhost:9000");
  EXPECT_EQ(h.kind, OracleDescriptor::Kind::kHttp);
  EXPECT_EQ(h.target, "http://localhost:9000");
  EXPECT_THROW(ParseOracleDescriptor("ftp://x"), ArgumentError);
  EXPECT_THROW(ParseOracleDescriptor("exec:"), ArgumentError);
}

TEST(ProtocolServerTest, MalformedRequestKeepsServing) {
  ProtocolServer server(std::make_shared<ConstantScorer>(0.5, 2), nullptr, std::nullopt);
  const nlohmann::json bad = nlohmann::json::parse(server.Handle("not json"));
  EXPECT_FALSE(bad["ok"].get<bool>());
  const Capabilities caps = ParseHandshakeResponse(server.Handle(HandshakeRequest(5)), 5);
  EXPECT_EQ(caps.class_count, 2);
  EXPECT_FALSE(caps.feature_dims.has_value());
}

TEST(SubprocessTest, MatchesInProcessScores) {
  const SyntheticScene scene = MakeTargetScene(kSceneSeed, Scene());
  auto endpoint = Exec({"--scene-seed", std::to_string(kSceneSeed)});
  WireScoringOracle remote(endpoint);
  SyntheticRegionScorer local(scene.target);
  ASSERT_EQ(remote.class_count(), 2);
  std::vector<ImageTensor> images;
  for (int i = 0; i < 5; ++i) images.push_back(RandomImage(i, kSide, kSide, 3));
  const auto a = remote.Score(images);
  const auto b = local.Score(images);
  for (size_t i = 0; i < images.size(); ++i) {
    for (int k = 0; k < 2; ++k) EXPECT_NEAR(a[i][k], b[i][k], 1e-12);
  }
}

TEST(SubprocessTest, ExplainMatchesInProcess) {
  const SyntheticScene scene = MakeTargetScene(kSceneSeed, Scene());
  ExplainConfig cfg = ExplainConfig{}.ScaledTo(kSide);
  cfg.max_iters = 3;

  auto endpoint = Exec({"--scene-seed", std::to_string(kSceneSeed)});
  WireScoringOracle remote(endpoint);
  WireFeatureProvider remote_features(endpoint);
  const ExplanationResult wire = Explain(scene.image, remote, remote_features, cfg);

  SyntheticRegionScorer local(scene.target);
  SyntheticPyramidProvider local_features;
  const ExplanationResult direct = Explain(scene.image, local, local_features, cfg);

  ASSERT_EQ(wire.per_iteration.size(), direct.per_iteration.size());
  for (size_t i = 0; i < wire.final_map.size(); ++i) {
    EXPECT_NEAR(wire.final_map[i], direct.final_map[i], 1e-6);
  }
}

TEST(SubprocessTest, FeatureLevelsMatchHandshake) {
  auto endpoint = Exec({});
  const Capabilities& caps = endpoint->Handshake();
  ASSERT_TRUE(caps.feature_dims.has_value());
  const FeatureLevels levels = endpoint->Features(RandomImage(2, kSide, kSide, 3));
  ASSERT_EQ(levels.size(), 4u);
  for (size_t i = 0; i < 4; ++i) {
    EXPECT_EQ(levels[i].height(), (*caps.feature_dims)[i][0]);
    EXPECT_EQ(levels[i].channels(), (*caps.feature_dims)[i][2]);
  }
}

TEST(SubprocessTest, BatchedExchangeKeepsOrder) {
  auto endpoint = Exec({"--scorer", "mean"});
  WireScoringOracle remote(endpoint);
  std::vector<ImageTensor> images;
  for (int i = 0; i < 20; ++i) images.emplace_back(kSide, kSide, 3, float(i) / 20);
  const auto scores = remote.Score(images);
  for (int i = 0; i < 20; ++i) EXPECT_NEAR(scores[i][0], double(float(i) / 20), 1e-7);
}

TEST(SubprocessTest, RawExchangeSurvivesMalformedLine) {
  SubprocessTransport transport({EchoServer()}, 10s);
  const std::vector<std::string> requests{"garbage", HandshakeRequest(11)};
  const std::vector<std::string> replies = transport.Exchange(requests);
  ASSERT_EQ(replies.size(), 2u);
  EXPECT_FALSE(nlohmann::json::parse(replies[0])["ok"].get<bool>());
  EXPECT_EQ(ParseHandshakeResponse(replies[1], 11).class_count, 2);
}

TEST(SubprocessTest, TimeoutIsTransportError) {
  EXPECT_THROW(ConnectEndpoint(ParseOracleDescriptor("exec:/bin/sleep 5"), 200ms),
               TransportError);
}

TEST(SubprocessTest, MissingExecutableIsTransportError) {
  EXPECT_THROW(ConnectEndpoint(ParseOracleDescriptor("exec:/nonexistent/oracle")),
               TransportError);
}

TEST(SubprocessTest, EarlyExitIsTransportError) {
  EXPECT_THROW(ConnectEndpoint(ParseOracleDescriptor("exec:/bin/true")), TransportError);
}

// Each scripted fault must surface as its designated error class.
TEST(FaultTest, ScoreFaults) {
  auto make = [](size_t) { return ImageTensor(kSide, kSide, 3, 0.5f); };
  for (const char* fault : {"extra-score", "short-score"}) {
    WireScoringOracle remote(Exec({"--fault", fault}));
    EXPECT_THROW(ScoreBatched(remote, 2, make), ContractError) << fault;
  }
  WireScoringOracle nan(Exec({"--fault", "nan-score"}));
  EXPECT_THROW(ScoreBatched(nan, 2, make), NumericError);
}

TEST(FaultTest, FeatureFaults) {
  for (const char* fault : {"missing-level", "wrong-level-dims"}) {
    auto endpoint = Exec({"--fault", fault});
    EXPECT_THROW(endpoint->Features(ImageTensor(kSide, kSide, 3)), ContractError) << fault;
  }
}

TEST(FaultTest, HandshakeFaults) {
  for (const char* fault : {"no-score-kind", "bad-version", "malformed", "wrong-id"}) {
    EXPECT_THROW(Exec({"--fault", fault}), ProtocolError) << fault;
  }
}

TEST(FaultTest, NoFeaturesIsRemoteError) {
  auto endpoint = Exec({"--no-features"});
  EXPECT_FALSE(endpoint->Handshake().feature_dims.has_value());
  EXPECT_THROW(endpoint->Features(ImageTensor(kSide, kSide, 3)), RemoteError);
}

class HttpFixture : public ::testing::Test {
 protected:
  void SetUp() override {
    const SyntheticScene scene = MakeTargetScene(kSceneSeed, Scene());
    server_ = std::make_unique<ProtocolServer>(
        std::make_shared<SyntheticRegionScorer>(scene.target),
        std::make_shared<SyntheticPyramidProvider>(), Shape3{kSide, kSide, 3});
    http_.Post("/v1", [this](const httplib::Request& req, httplib::Response& res) {
      res.set_content(server_->HandleBody(req.body), "application/x-ndjson");
    });
    port_ = http_.bind_to_any_port("127.0.0.1");
    ASSERT_GT(port_, 0);
    thread_ = std::thread([this] { http_.listen_after_bind(); });
    http_.wait_until_ready();
  }
  void TearDown() override {
    http_.stop();
    if (thread_.joinable()) thread_.join();
  }
  std::string Url() const { return "http://127.0.0.1:" + std::to_string(port_); }

  std::unique_ptr<ProtocolServer> server_;
  httplib::Server http_;
  std::thread thread_;
  int port_ = 0;
};

TEST_F(HttpFixture, ScoresMatchInProcess) {
  const SyntheticScene scene = MakeTargetScene(kSceneSeed, Scene());
  auto endpoint = ConnectEndpoint(ParseOracleDescriptor(Url()), 10s);
  WireScoringOracle remote(endpoint);
  SyntheticRegionScorer local(scene.target);
  std::vector<ImageTensor> images;
  for (int i = 0; i < 9; ++i) images.push_back(RandomImage(50 + i, kSide, kSide, 3));
  const ScoreMatrix a = ScoreBatched(remote, images.size(),
                                     [&](size_t i) { return images[i]; },
                                     {.batch_size = 4, .threads = 3});
  const auto b = local.Score(images);
  for (size_t i = 0; i < images.size(); ++i) EXPECT_NEAR(a.at(i, 0), b[i][0], 1e-12);
  EXPECT_EQ(endpoint->Features(scene.image).size(), 4u);
}

TEST_F(HttpFixture, UnreachableServerIsTransportError) {
  const std::string url = Url();
  TearDown();
  EXPECT_THROW(ConnectEndpoint(ParseOracleDescriptor(url), 1s), TransportError);
}

}  // namespace
}  // namespace iassa
