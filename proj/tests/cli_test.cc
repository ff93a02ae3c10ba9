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

#include "cli.h"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include "iassa/image_io.h"
#include "iassa/synthetic.h"
#include "test_support.h"

namespace iassa::cli {
namespace {

namespace fs = std::filesystem;
using iassa::testing::TempDir;
using nlohmann::json;

struct Outcome {
  int code;
  std::string out;
  std::string err;
};

Outcome RunCli(const std::vector<std::string>& args) {
  std::ostringstream out;
  std::ostringstream err;
  const int code = Run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string Slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream text;
  text << in.rdbuf();
  return text.str();
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    SceneOptions o;
    o.side = 32;
    o.target_side = 12;
    const SyntheticScene scene = MakeTargetScene(21, o);
    image_ = dir_ / "scene.ppm";
    gt_ = dir_ / "gt.pgm";
    SaveImage(scene.image, image_);
    SaveRegionMask(scene.target, gt_);
  }

  Outcome Explain(const std::string& out_dir, const std::vector<std::string>& extra = {},
                  const std::string& oracle = "builtin:region") {
    std::vector<std::string> args{"explain", "--image", image_.string(), "--oracle",
                                  oracle,    "--iters", "3",             "--out-dir", out_dir};
    args.insert(args.end(), extra.begin(), extra.end());
    return RunCli(args);
  }

  TempDir dir_;
  fs::path image_;
  fs::path gt_;
};

TEST_F(CliTest, ExplainWritesOutputs) {
  const fs::path out = dir_ / "run";
  const Outcome r = Explain(out.string(), {"--emit-raw"});
  ASSERT_EQ(r.code, 0) << r.err;
  for (const char* name : {"saliency.smap", "raw.smap", "heatmap.png", "explanation.json",
                           "manifest.json"}) {
    EXPECT_TRUE(fs::exists(out / name)) << name;
  }
  const json doc = json::parse(Slurp(out / "explanation.json"));
  EXPECT_EQ(doc["method"], "iassa");
  EXPECT_EQ(doc["final_map"]["height"], 32);
  EXPECT_EQ(doc["config"]["max_iters"], 3);
  EXPECT_LE(doc["per_iteration"].size(), 3u);
  const SaliencyMap map = LoadSaliency(out / "saliency.smap");
  EXPECT_EQ(map.height(), 32);
  const json manifest = json::parse(Slurp(out / "manifest.json"));
  EXPECT_TRUE(manifest.contains("stage_seconds"));
}

TEST_F(CliTest, ExplainFormatsAndMethods) {
  for (const char* method : {"rise", "occlusion"}) {
    const fs::path out = dir_ / method;
    const Outcome r = Explain(out.string(), {"--method", method, "--rise-masks", "200",
                                             "--format", "csv"});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_TRUE(fs::exists(out / "saliency.csv"));
    EXPECT_EQ(json::parse(Slurp(out / "explanation.json"))["method"], method);
  }
}

TEST_F(CliTest, SameSeedIsBitIdenticalAcrossThreadCounts) {
  const fs::path a = dir_ / "a";
  const fs::path b = dir_ / "b";
  ASSERT_EQ(Explain(a.string(), {"--threads", "1"}).code, 0);
  ASSERT_EQ(Explain(b.string(), {"--threads", "8"}).code, 0);
  EXPECT_EQ(Slurp(a / "saliency.smap"), Slurp(b / "saliency.smap"));
  EXPECT_EQ(Slurp(a / "explanation.json"), Slurp(b / "explanation.json"));

  for (const char* threads : {"1", "8"}) {
    const fs::path ea = dir_ / (std::string("ea") + threads);
    const fs::path eb = dir_ / (std::string("eb") + threads);
    for (const fs::path& out : {ea, eb}) {
      const Outcome r = RunCli({"evaluate", "--image", image_.string(), "--saliency",
                                (a / "saliency.smap").string(), "--gt", gt_.string(),
                                "--oracle", "builtin:region", "--threads", threads,
                                "--out-dir", out.string()});
      ASSERT_EQ(r.code, 0) << r.err;
    }
    EXPECT_EQ(Slurp(ea / "report.json"), Slurp(eb / "report.json"));
    EXPECT_EQ(Slurp(ea / "report.json"), Slurp(dir_ / "ea1" / "report.json"));
  }
}

TEST_F(CliTest, EvaluatePerfectMapScoresOne) {
  const fs::path gt_map = dir_ / "gt.csv";
  SaliencyMap s(32, 32);
  const RegionMask gt = LoadRegionMask(gt_);
  for (int r = 0; r < 32; ++r) {
    for (int c = 0; c < 32; ++c) s.at(r, c) = gt.at(r, c) ? 1.0 : 0.0;
  }
  SaveSaliency(s, gt_map, SaliencyFormat::kCsv);
  const fs::path out = dir_ / "eval";
  const Outcome r = RunCli({"evaluate", "--image", image_.string(), "--saliency",
                            gt_map.string(), "--gt", gt_.string(), "--oracle",
                            "builtin:region", "--out-dir", out.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  const json report = json::parse(Slurp(out / "report.json"));
  EXPECT_EQ(report["image_level"]["f1"], 1.0);
  EXPECT_EQ(report["image_level"]["iou"], 1.0);
  EXPECT_EQ(report["image_level"]["pointing_hit"], true);
  EXPECT_EQ(report["pixel_norm_divisor"], 144);
  EXPECT_TRUE(fs::exists(out / "deletion.csv"));
  EXPECT_TRUE(fs::exists(out / "insertion.csv"));
}

TEST_F(CliTest, ExitCodes) {
  EXPECT_EQ(RunCli({}).code, 1);
  EXPECT_EQ(RunCli({"explain"}).code, 1);
  EXPECT_EQ(RunCli({"explain", "--image", image_.string(), "--bogus"}).code, 1);
  EXPECT_EQ(Explain((dir_ / "x").string(), {"--lambda", "2"}).code, 1);
  const Outcome missing = Explain((dir_ / "y").string(), {}, "exec:/nonexistent/o");
  EXPECT_EQ(missing.code, 2);
  EXPECT_FALSE(missing.err.empty());
  const Outcome no_gt = RunCli({"evaluate", "--image", image_.string(), "--saliency",
                                image_.string(), "--gt", (dir_ / "none.pgm").string(),
                                "--oracle", "builtin:region"});
  EXPECT_EQ(no_gt.code, 3);
  EXPECT_EQ(RunCli({"explain", "--image", (dir_ / "none.ppm").string(), "--oracle",
                    "builtin:region"})
                .code,
            3);
  EXPECT_EQ(RunCli({"--version"}).code, 0);
}

TEST_F(CliTest, ExecOracleMatchesBuiltin) {
  const fs::path builtin = dir_ / "builtin";
  const fs::path exec = dir_ / "exec";
  ASSERT_EQ(Explain(builtin.string(), {}, "builtin:mean").code, 0);
  const Outcome r = Explain(exec.string(), {},
                            std::string("exec:") + IASSA_ECHO_SERVER_PATH +
                                " --scorer mean --side 32");
  ASSERT_EQ(r.code, 0) << r.err;
  const SaliencyMap a = LoadSaliency(builtin / "saliency.smap");
  const SaliencyMap b = LoadSaliency(exec / "saliency.smap");
  for (size_t i = 0; i < a.size(); ++i) EXPECT_NEAR(a[i], b[i], 1e-6);
}

TEST(CliCompareTest, TableShapeAndRerun) {
  TempDir dir;
  const std::vector<std::string> args{
      "compare", "--scenes", "2",  "--side",       "32",  "--target-side", "12",
      "--iters", "2",        "--rise-masks", "200", "--out-dir", (dir / "c").string()};
  const Outcome r = RunCli(args);
  ASSERT_EQ(r.code, 0) << r.err;
  const std::string table = Slurp(dir / "c" / "compare.csv");
  std::istringstream lines(table);
  std::vector<std::string> rows;
  for (std::string line; std::getline(lines, line);) rows.push_back(line);
  ASSERT_EQ(rows.size(), 4u);
  EXPECT_EQ(rows[0],
            "method,deletion_auc,insertion_auc,f1,iou,pointing,px_deletion_auc,"
            "px_insertion_auc,px_f1,px_iou,px_pointing");
  for (size_t i = 1; i < rows.size(); ++i) {
    EXPECT_EQ(std::count(rows[i].begin(), rows[i].end(), ','), 10) << rows[i];
  }
  EXPECT_TRUE(rows[1].starts_with("iassa,"));
  std::vector<std::string> again = args;
  again.back() = (dir / "d").string();
  ASSERT_EQ(RunCli(again).code, 0);
  EXPECT_EQ(table, Slurp(dir / "d" / "compare.csv"));
  EXPECT_EQ(Slurp(dir / "c" / "compare_scenes.csv"), Slurp(dir / "d" / "compare_scenes.csv"));
}

TEST(CliBenchTest, OracleCallsAddUp) {
  const Outcome r = RunCli({"bench", "--side", "32", "--target-side", "12", "--iters", "3"});
  ASSERT_EQ(r.code, 0) << r.err;
  const json doc = json::parse(r.out);
  ASSERT_EQ(doc["scenes"].size(), 1u);
  const json& scene = doc["scenes"][0];
  size_t sum = 0;
  for (const json& it : scene["iterations"]) {
    EXPECT_EQ(it["oracle_calls"], it["mask_count"]);
    sum += it["oracle_calls"].get<size_t>();
  }
  EXPECT_EQ(scene["oracle_calls"], sum);
  EXPECT_EQ(doc["oracle_calls"], sum);
  EXPECT_EQ(scene["setup_oracle_calls"], 1);
}

bool HavePythonJsonSchema() {
  return std::system("python3 -c 'import jsonschema' >/dev/null 2>&1") == 0;
}

bool Validates(const fs::path& schema, const fs::path& doc) {
  const std::string cmd =
      "python3 -c 'import json,sys,jsonschema; "
      "jsonschema.validate(json.load(open(sys.argv[2])), json.load(open(sys.argv[1])))' '" +
      schema.string() + "' '" + doc.string() + "'";
  return std::system(cmd.c_str()) == 0;
}

TEST_F(CliTest, OutputsMatchPublishedSchemas) {
  if (!HavePythonJsonSchema()) GTEST_SKIP() << "python3 jsonschema is not installed";
  const fs::path docs(IASSA_DOCS_DIR);
  const fs::path run = dir_ / "schema";
  ASSERT_EQ(Explain(run.string()).code, 0);
  EXPECT_TRUE(Validates(docs / "explanation_result.schema.json", run / "explanation.json"));
  for (const char* method : {"rise", "occlusion"}) {
    const fs::path out = dir_ / (std::string("schema_") + method);
    ASSERT_EQ(Explain(out.string(), {"--method", method, "--rise-masks", "100"}).code, 0);
    EXPECT_TRUE(Validates(docs / "explanation_result.schema.json", out / "explanation.json"));
  }
  const fs::path eval = dir_ / "schema_eval";
  ASSERT_EQ(RunCli({"evaluate", "--image", image_.string(), "--saliency",
                    (run / "saliency.smap").string(), "--gt", gt_.string(), "--oracle",
                    "builtin:region", "--out-dir", eval.string()})
                .code,
            0);
  EXPECT_TRUE(Validates(docs / "eval_report.schema.json", eval / "report.json"));
}

}  // namespace
}  // namespace iassa::cli
