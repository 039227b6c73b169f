// Copyright 2026 The hcsmap Authors
// SPDX-License-Identifier: Apache-2.0
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <filesystem>
#include <string>

#include <gtest/gtest.h>
#include <json.hpp>

#include "common/error.h"
#include "common/io_util.h"
#include "pipeline/commands.h"
#include "pipeline/config.h"
#include "test_util.h"

namespace hcs {
namespace {

namespace fs = std::filesystem;

PipelineConfig TinyConfig(const fs::path& out) {
  PipelineConfig cfg = ParsePipelineConfig(R"({
    "seed": 5,
    "synth": {"extent": 64, "tile_size": 32, "acquisitions": 2},
    "canopy": {"iterations": 50, "eval_every": 25, "width": 4, "blocks": 1,
               "composite_images": 2, "tile": 64, "overlap": 8},
    "carbon": {"epochs": 1, "width": 4, "window": 32}
  })");
  cfg.output_dir = out.string();
  return cfg;
}

TEST(PipelineConfigTest, CanonicalTextRoundTripsByteIdentically) {
  PipelineConfig cfg = TinyConfig("/tmp/x");
  const std::string text = SerializePipelineConfig(cfg);
  EXPECT_EQ(SerializePipelineConfig(ParsePipelineConfig(text)), text);
  EXPECT_EQ(ParsePipelineConfig(text), cfg);
  const std::string defaults = SerializePipelineConfig(PipelineConfig{});
  EXPECT_EQ(SerializePipelineConfig(ParsePipelineConfig(defaults)), defaults);
  EXPECT_EQ(ParsePipelineConfig("{}"), PipelineConfig{});
}

TEST(PipelineConfigTest, UnknownKeysAndBadValuesAreConfigErrors) {
  for (const char* text : {R"({"sed": 1})", R"({"synth": {"extnt": 10}})", "{not json",
                           R"({"hcs": {"thresholds": {"breakpoints": [1, 2]}}})",
                           R"({"carbon": {"seeds": [1, 2]}})", R"({"threads": 0})"}) {
    try {
      PipelineConfig cfg = ParsePipelineConfig(text);
      Validate(cfg);
      ADD_FAILURE() << "accepted " << text;
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::kConfig) << text;
    }
  }
}

TEST(PipelineConfigTest, ResolvedPropagatesSeedAndThreads) {
  PipelineConfig cfg;
  cfg.seed = 77;
  cfg.threads = 3;
  PipelineConfig r = Resolved(cfg);
  EXPECT_EQ(r.synth.world.seed, 77u);
  EXPECT_EQ(r.canopy.train.seed, 77u);
  EXPECT_EQ(r.canopy.train.threads, 3);
  EXPECT_EQ(r.carbon.threads, 3);
  ASSERT_EQ(r.carbon.seeds.size(), 5u);
  EXPECT_NE(r.carbon.seeds[0], r.carbon.seeds[1]);
  cfg.seed = 78;
  EXPECT_NE(Resolved(cfg).carbon.seeds, r.carbon.seeds);
  EXPECT_EQ(WorldDir(cfg), fs::path("hcsmap_out") / "world");
}

TEST(CommandsTest, NamesAndUnknownCommand) {
  EXPECT_EQ(CommandNames().size(), 10u);
  EXPECT_TRUE(IsCommand("predict-carbon"));
  EXPECT_FALSE(IsCommand("train"));
  EXPECT_THROW(RunCommand(PipelineConfig{}, "train"), Error);
}

TEST(CommandsTest, StageBeforeItsInputsIsAnIoError) {
  const auto dir = testing::TempDir("missing");
  try {
    RunCommand(TinyConfig(dir), "train-canopy");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kIo);
  }
  fs::remove_all(dir);
}

TEST(CommandsTest, FullPipelineWritesArtifactsAndManifests) {
  const auto dir = testing::TempDir("pipeline");
  const PipelineConfig cfg = TinyConfig(dir);
  for (std::string_view c : CommandNames()) {
    if (c == "grad-check") continue;
    ASSERT_NO_THROW(RunCommand(cfg, c)) << c;
  }
  for (const char* f : {"world/height.grd1", "world/footprints.fpd1", "world/world.json",
                        "canopy/model.nnp1", "canopy/dataset.fpd1", "composite/canopy_height.grd1",
                        "carbon/ensemble.json", "carbon/member_4.nnp1", "carbon_pred/carbon_mean.grd1",
                        "classify/hcs_classes.grd1", "classify/legend.json", "classify/hcs_classes.ppm",
                        "stats/zones.csv", "stats/boxplots.csv", "eval/metrics.csv",
                        "eval/confusion.csv", "eval/metrics.json"}) {
    EXPECT_TRUE(fs::exists(dir / f)) << f;
  }
  // Every recorded output hash matches the file on disk.
  for (const char* stage : {"world", "canopy", "predict", "composite", "carbon", "carbon_pred",
                            "classify", "stats", "eval"}) {
    const auto manifest = nlohmann::json::parse(ReadFileBytes(dir / stage / "manifest.json"));
    // The manifest carries the effective configuration and its hash.
    const PipelineConfig recorded = PipelineConfigFromJson(manifest.at("config"));
    EXPECT_EQ(manifest.at("config_sha256"), Sha256Hex(SerializePipelineConfig(recorded)));
    EXPECT_EQ(recorded, Resolved(cfg)) << stage;
    EXPECT_FALSE(manifest.at("outputs").empty()) << stage;
    for (const auto& [name, hash] : manifest.at("outputs").items()) {
      EXPECT_EQ(hash, Sha256Hex(ReadFileBytes(dir / name))) << name;
    }
  }
  const auto world = nlohmann::json::parse(ReadFileBytes(dir / "world/world.json"));
  EXPECT_TRUE(world.contains("noise_floor"));
  const std::string metrics = ReadFileBytes(dir / "eval/metrics.csv");
  EXPECT_EQ(metrics.rfind("quantity,count,rmse,mae,me,mse\n", 0), 0u);
  fs::remove_all(dir);
}

TEST(CommandsTest, GradCheckSummary) {
  const auto summary = RunCommand(PipelineConfig{}, "grad-check");
  EXPECT_TRUE(summary.at("passed").get<bool>());
  EXPECT_LT(summary.at("max_rel_error").get<double>(), 1e-4);
}

}  // namespace
}  // namespace hcs
