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

#include <cmath>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "carbon/carbon.h"
#include "common/error.h"
#include "evalstats/evalstats.h"
#include "nn/checkpoint.h"
#include "synth/world.h"
#include "test_util.h"

namespace hcs {
namespace {

TEST(ColumnSplitTest, DisjointBandsCoverTheGrid) {
  RegionSplit s = ColumnSplit(200, 50, 0.1, 0.1);
  EXPECT_EQ(s.test.width, 20);
  EXPECT_EQ(s.val.width, 18);
  EXPECT_EQ(s.train.width + s.val.width + s.test.width, 200);
  EXPECT_FALSE(s.train.Overlaps(s.test));
  EXPECT_NO_THROW(ValidateSplit(s, 200, 50));
}

TEST(ColumnSplitTest, OverlappingRegionsAreAnError) {
  RegionSplit s = ColumnSplit(100, 100, 0.2, 0.0);
  s.test.col0 -= 5;
  EXPECT_THROW(ValidateSplit(s, 100, 100), Error);
  RegionSplit outside = ColumnSplit(100, 100, 0.2, 0.0);
  outside.test.width += 1;
  EXPECT_THROW(ValidateSplit(outside, 100, 100), Error);
  EXPECT_THROW(ColumnSplit(100, 100, 0.0, 0.1), Error);
}

TEST(CarbonConfigTest, RequiresFiveSeedsAndRoundTrips) {
  CarbonConfig cfg;
  EXPECT_NO_THROW(Validate(cfg));
  EXPECT_EQ(CarbonConfigFromJson(ToJson(cfg)), cfg);
  cfg.seeds = {1, 2, 3};
  EXPECT_THROW(Validate(cfg), Error);
}

// Ensemble with hand-set members: a 1x1 model whose mean head is the
// constant `bias` (physical units) and whose log-variance is zero.
Checkpoint ConstantMember(double mean) {
  ModelSpec spec;
  spec.input_channels = 1;
  spec.layers = {{LayerKind::kConv, 1, 2, Activation::kIdentity}};
  Checkpoint c;
  c.model = Model(spec);
  c.model.Initialize(1);
  auto p = c.model.params();
  std::fill(p.begin(), p.end(), 0.0);
  p[2] = mean;  // bias of the mean channel, after the two weights
  return c;
}

TEST(PredictCarbonTest, MemberMeansAverageAndSpreadAddsVariance) {
  CarbonEnsemble e;
  for (double m : {100.0, 110.0, 120.0, 130.0, 140.0}) e.members.push_back(ConstantMember(m));
  e.seeds = {1, 2, 3, 4, 5};
  Grid height(5, 4, 1);
  CarbonPrediction p = PredictCarbon(e, height, {64, 8, 1});
  for (float v : p.mean.values()) EXPECT_NEAR(v, 120.0f, 1e-4);
  // Member variance exp(0) = 1 plus population variance of the means (200).
  for (float v : p.variance.values()) EXPECT_NEAR(v, 201.0f, 1e-3);
}

TEST(PredictCarbonTest, IdenticalMembersHaveNoSpread) {
  CarbonEnsemble e;
  for (int i = 0; i < 5; ++i) e.members.push_back(ConstantMember(42.0));
  CarbonPrediction p = PredictCarbon(e, Grid(3, 3, 1), {64, 8, 1});
  for (float v : p.mean.values()) EXPECT_NEAR(v, 42.0f, 1e-5);
  for (float v : p.variance.values()) EXPECT_NEAR(v, 1.0f, 1e-6);
}

TEST(PredictCarbonTest, MemberCountOtherThanFiveIsAnError) {
  CarbonEnsemble e;
  for (int i = 0; i < 4; ++i) e.members.push_back(ConstantMember(1.0));
  EXPECT_THROW(PredictCarbon(e, Grid(3, 3, 1)), Error);
}

TEST(PredictCarbonTest, NegativeMeanIsClamped) {
  CarbonEnsemble e;
  for (int i = 0; i < 5; ++i) e.members.push_back(ConstantMember(-3.0));
  CarbonPrediction p = PredictCarbon(e, Grid(3, 3, 1), {64, 8, 1});
  for (float v : p.mean.values()) EXPECT_EQ(v, 0.0f);
}

Grid Ramp(int w, int h) {
  Grid g(w, h, 1);
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) g.at(0, r, c) = static_cast<float>(c * 3 + r);
  }
  return g;
}

CarbonPrediction FromGrid(const Grid& mean) {
  return {mean, Grid(mean.width(), mean.height(), 1)};
}

TEST(EvaluateCarbonTest, PerfectAndBiasedPredictions) {
  Grid ref = Ramp(40, 30);
  const PixelRect region{20, 0, 20, 30};
  CarbonEvalReport perfect = EvaluateCarbon(FromGrid(ref), ref, region);
  EXPECT_EQ(perfect.metrics.rmse, 0.0);
  EXPECT_EQ(perfect.metrics.me, 0.0);
  EXPECT_EQ(perfect.metrics.count, 600);
  EXPECT_FALSE(perfect.saturated);
  Grid biased = ref;
  for (float& v : biased.values()) v += 10.0f;
  CarbonEvalReport over = EvaluateCarbon(FromGrid(biased), ref, region);
  EXPECT_NEAR(over.metrics.me, 10.0, 1e-9);
  EXPECT_NEAR(over.metrics.rmse, 10.0, 1e-9);
  EXPECT_THROW(EvaluateCarbon(FromGrid(ref), ref, PixelRect{0, 0, 0, 0}), Error);
}

TEST(EvaluateCarbonTest, SaturatingPredictorIsDetected) {
  Grid ref(100, 100, 1);
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<float> u(0.0f, 250.0f);
  for (float& v : ref.values()) v = u(rng);
  Grid sat = ref;
  for (float& v : sat.values()) v = std::min(v, 150.0f);
  CarbonEvalReport r = EvaluateCarbon(FromGrid(sat), ref, PixelRect{0, 0, 100, 100});
  EXPECT_TRUE(r.saturated);
  EXPECT_LT(r.saturation_ratio, kSaturationRatio);
  ASSERT_EQ(r.deciles.size(), 10u);
  EXPECT_NEAR(r.deciles.back().pred_mean, 150.0, 1e-6);
  EXPECT_FALSE(EvaluateCarbon(FromGrid(ref), ref, PixelRect{0, 0, 100, 100}).saturated);
}

// Noiseless power-law world shared by the training tests.
class TrainedEnsembleTest : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    WorldConfig w;
    w.extent = 96;
    w.seed = 3;
    w.correlation_length = 8;
    w.carbon_noise_sd = 0.0;
    world_ = new World(GenerateWorld(w));
    split_ = ColumnSplit(96, 96, 0.2, 0.0);
    cfg_.width = 8;
    cfg_.window = 32;
    cfg_.epochs = 300;
    cfg_.learning_rate = 1e-3;
    ensemble_ = new CarbonEnsemble(TrainCarbonEnsemble(world_->height, world_->carbon, split_, cfg_));
  }
  static void TearDownTestSuite() {
    delete world_;
    delete ensemble_;
  }

  static World* world_;
  static CarbonEnsemble* ensemble_;
  static RegionSplit split_;
  static CarbonConfig cfg_;
};

World* TrainedEnsembleTest::world_ = nullptr;
CarbonEnsemble* TrainedEnsembleTest::ensemble_ = nullptr;
RegionSplit TrainedEnsembleTest::split_;
CarbonConfig TrainedEnsembleTest::cfg_;

TEST_F(TrainedEnsembleTest, EachMemberFitsNoiselessTraining) {
  ASSERT_EQ(ensemble_->members.size(), 5u);
  const PixelRect& t = split_.train;
  const Grid ref = CropGrid(world_->carbon, t.col0, t.row0, t.width, t.height);
  for (const auto& m : ensemble_->members) {
    const Grid pred = SelectBand(PredictMember(m.model, world_->height), 0);
    const double rmse =
        ComputeRegressionMetrics(CropGrid(pred, t.col0, t.row0, t.width, t.height), ref).rmse;
    EXPECT_LT(rmse, 5.0);
  }
}

TEST_F(TrainedEnsembleTest, EnsembleMeanIsMemberAverage) {
  const CarbonPrediction p = PredictCarbon(*ensemble_, world_->height);
  std::vector<Grid> members;
  for (const auto& m : ensemble_->members) members.push_back(PredictMember(m.model, world_->height));
  double max_rel = 0.0;
  bool disagree = false;
  for (size_t i = 0; i < p.mean.pixel_count(); ++i) {
    double sum = 0.0, lo = 1e300, hi = -1e300;
    for (const Grid& g : members) {
      const double v = g.band(0)[i];
      sum += v;
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    const double avg = std::max(0.0, sum / 5.0);
    max_rel = std::max(max_rel, std::abs(p.mean.values()[i] - avg) / std::max(1.0, std::abs(avg)));
    if (hi > lo) {
      disagree = true;
      ASSERT_GT(p.variance.values()[i], 0.0f);
    }
  }
  EXPECT_LT(max_rel, 1e-6);
  EXPECT_TRUE(disagree);
  // Reordering members does not change the mean.
  CarbonEnsemble reversed = *ensemble_;
  std::reverse(reversed.members.begin(), reversed.members.end());
  const CarbonPrediction q = PredictCarbon(reversed, world_->height);
  for (size_t i = 0; i < p.mean.pixel_count(); ++i) {
    ASSERT_NEAR(q.mean.values()[i], p.mean.values()[i], 1e-6 * std::max(1.0f, p.mean.values()[i]));
  }
}

TEST_F(TrainedEnsembleTest, MonotoneInConstantHeight) {
  double previous = -1.0;
  for (int level = 0; level < 10; ++level) {
    const float h = 5.0f + 5.0f * level;  // within the 0..55 m training support
    Grid tile(32, 32, 1);
    std::fill(tile.values().begin(), tile.values().end(), h);
    const CarbonPrediction p = PredictCarbon(*ensemble_, tile, {64, 8, 1});
    double mean = 0.0;
    for (float v : p.mean.values()) mean += v;
    mean /= p.mean.pixel_count();
    EXPECT_GE(mean, previous) << "height " << h;
    previous = mean;
  }
}

TEST_F(TrainedEnsembleTest, EnsembleDirectoryRoundTrip) {
  const auto dir = testing::TempDir("ensemble");
  WriteEnsemble(dir, *ensemble_);
  EXPECT_TRUE(std::filesystem::exists(dir / "ensemble.json"));
  CarbonEnsemble back = ReadEnsemble(dir);
  ASSERT_EQ(back.members.size(), 5u);
  EXPECT_EQ(back.seeds, ensemble_->seeds);
  for (size_t i = 0; i < 5; ++i) {
    EXPECT_EQ(EncodeNnp1(back.members[i]), EncodeNnp1(ensemble_->members[i]));
  }
  std::filesystem::remove_all(dir);
}

TEST(TrainCarbonTest, IdenticalSeedsGiveBitIdenticalMembers) {
  WorldConfig w;
  w.extent = 48;
  World world = GenerateWorld(w);
  RegionSplit split = ColumnSplit(48, 48, 0.2, 0.1);
  CarbonConfig cfg;
  cfg.width = 4;
  cfg.window = 24;
  cfg.epochs = 3;
  std::vector<EpochRecord> trace;
  Checkpoint a = TrainCarbonMember(world.height, world.carbon, split, 9, cfg, nullptr, &trace);
  Checkpoint b = TrainCarbonMember(world.height, world.carbon, split, 9, cfg);
  Checkpoint c = TrainCarbonMember(world.height, world.carbon, split, 10, cfg);
  EXPECT_EQ(EncodeNnp1(a), EncodeNnp1(b));
  EXPECT_NE(EncodeNnp1(a), EncodeNnp1(c));
  ASSERT_EQ(trace.size(), 3u);
  EXPECT_TRUE(std::isfinite(trace.back().val_rmse));
  EXPECT_EQ(a.model.spec().ReceptiveField(), 15);
}

TEST(TrainCarbonTest, OverlappingSplitIsRejected) {
  WorldConfig w;
  w.extent = 32;
  World world = GenerateWorld(w);
  RegionSplit split = ColumnSplit(32, 32, 0.2, 0.0);
  split.train.width = 30;
  CarbonConfig cfg;
  cfg.epochs = 1;
  EXPECT_THROW(TrainCarbonMember(world.height, world.carbon, split, 1, cfg), Error);
}

}  // namespace
}  // namespace hcs
