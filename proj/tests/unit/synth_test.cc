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
#include <numeric>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "canopy/footprint.h"
#include "synth/value_noise.h"
#include "synth/world.h"

namespace hcs {
namespace {

WorldConfig SmallWorld(int extent = 128) {
  WorldConfig cfg;
  cfg.extent = extent;
  cfg.seed = 17;
  return cfg;
}

// Lag (pixels) at which the variogram-derived correlation 1 - gamma(h)/var
// falls to 1/e, averaged over rows and columns, linearly interpolated.
double VariogramCorrelationLength(const Grid& g) {
  const int w = g.width(), h = g.height();
  const auto v = g.band(0);
  const double mean = std::accumulate(v.begin(), v.end(), 0.0) / v.size();
  double var = 0.0;
  for (float x : v) var += (x - mean) * (x - mean);
  var /= v.size();
  double previous = 1.0;
  for (int lag = 1; lag < w / 2; ++lag) {
    double sq = 0.0;
    int64_t n = 0;
    for (int r = 0; r < h; ++r) {
      for (int c = 0; c + lag < w; ++c) {
        const double d = g.at(0, r, c + lag) - g.at(0, r, c);
        sq += d * d;
        ++n;
      }
    }
    for (int r = 0; r + lag < h; ++r) {
      for (int c = 0; c < w; ++c) {
        const double d = g.at(0, r + lag, c) - g.at(0, r, c);
        sq += d * d;
        ++n;
      }
    }
    const double rho = 1.0 - 0.5 * sq / n / var;
    if (rho <= std::exp(-1.0)) {
      return lag - 1 + (previous - std::exp(-1.0)) / (previous - rho);
    }
    previous = rho;
  }
  return w / 2.0;
}

TEST(GenerateWorldTest, IdentityAllometryWithoutNoiseGivesHeight) {
  WorldConfig cfg = SmallWorld();
  cfg.allometry_a = 1.0;
  cfg.allometry_b = 1.0;
  cfg.carbon_noise_sd = 0.0;
  World w = GenerateWorld(cfg);
  EXPECT_EQ(w.carbon.values(), w.height.values());
}

TEST(GenerateWorldTest, SameSeedIsBitIdentical) {
  World a = GenerateWorld(SmallWorld());
  World b = GenerateWorld(SmallWorld());
  EXPECT_EQ(a.height, b.height);
  EXPECT_EQ(a.carbon, b.carbon);
  EXPECT_EQ(a.scene_class, b.scene_class);
  EXPECT_EQ(a.zones, b.zones);
  WorldConfig other = SmallWorld();
  other.seed = 18;
  EXPECT_NE(GenerateWorld(other).height, a.height);
}

TEST(GenerateWorldTest, HeightsBareGroundAndZones) {
  WorldConfig cfg = SmallWorld();
  World w = GenerateWorld(cfg);
  size_t bare = 0;
  for (size_t i = 0; i < w.height.pixel_count(); ++i) {
    const float h = w.height.values()[i];
    ASSERT_GE(h, 0.0f);
    ASSERT_LE(h, cfg.max_height);
    ASSERT_GE(w.carbon.values()[i], 0.0f);
    const bool nonveg = w.scene_class.values()[i] == scene::kNotVegetated;
    if (nonveg) {
      ++bare;
      ASSERT_EQ(h, 0.0f);
    }
    const int z = static_cast<int>(w.zones.values()[i]);
    ASSERT_GE(z, 1);
    ASSERT_LE(z, cfg.zone_count);
  }
  EXPECT_NEAR(static_cast<double>(bare) / w.height.pixel_count(), cfg.nonveg_fraction, 0.01);
}

TEST(GenerateWorldTest, VariogramCorrelationLengthWithinQuarter) {
  for (double length : {8.0, 24.0}) {
    double sum = 0.0;
    const int seeds = 4;
    for (int s = 0; s < seeds; ++s) {
      WorldConfig cfg = SmallWorld(512);
      cfg.seed = 100 + s;
      cfg.correlation_length = length;
      sum += VariogramCorrelationLength(GenerateWorld(cfg).height);
    }
    const double measured = sum / seeds;
    EXPECT_NEAR(measured, length, 0.25 * length) << "measured " << measured;
  }
}

TEST(ValueNoiseTest, RankUniformIsExactlyUniform) {
  const auto field = ValueNoise(40, 30, 6.0, 5);
  const auto ranks = RankUniform(field);
  std::vector<double> sorted = ranks;
  std::sort(sorted.begin(), sorted.end());
  for (size_t i = 0; i < sorted.size(); ++i) {
    EXPECT_DOUBLE_EQ(sorted[i], static_cast<double>(i) / (sorted.size() - 1));
  }
}

TEST(GenerateImagesTest, NoCloudsWhenFractionIsZero) {
  WorldConfig cfg = SmallWorld();
  cfg.cloud_fraction = 0.0;
  World w = GenerateWorld(cfg);
  for (const auto& acq : GenerateImages(w.height, cfg, 3)) {
    EXPECT_EQ(acq.image.bands(), kImageBands);
    for (float p : acq.cloud_prob.values()) EXPECT_EQ(p, 0.0f);
  }
}

TEST(GenerateImagesTest, AcquisitionsShareTheHeightSignal) {
  WorldConfig cfg = SmallWorld();
  World w = GenerateWorld(cfg);
  const auto acq = GenerateImages(w.height, cfg, 2);
  for (int b = 0; b < kImageBands; ++b) {
    std::vector<double> x, y;
    for (size_t i = 0; i < w.height.pixel_count(); ++i) {
      if (acq[0].cloud_prob.values()[i] == 0.0f && acq[1].cloud_prob.values()[i] == 0.0f) {
        x.push_back(acq[0].image.band(b)[i]);
        y.push_back(acq[1].image.band(b)[i]);
      }
    }
    ASSERT_GT(x.size(), 1000u);
    const double mx = std::accumulate(x.begin(), x.end(), 0.0) / x.size();
    const double my = std::accumulate(y.begin(), y.end(), 0.0) / y.size();
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (size_t i = 0; i < x.size(); ++i) {
      sxy += (x[i] - mx) * (y[i] - my);
      sxx += (x[i] - mx) * (x[i] - mx);
      syy += (y[i] - my) * (y[i] - my);
    }
    EXPECT_GT(sxy / std::sqrt(sxx * syy), 0.9) << "band " << b;
  }
}

TEST(GenerateImagesTest, NoiselessAcquisitionsAgreeOnClearPixels) {
  WorldConfig cfg = SmallWorld();
  cfg.texture_noise_sd = 0.0;
  World w = GenerateWorld(cfg);
  const auto acq = GenerateImages(w.height, cfg, 2);
  size_t clear = 0;
  for (size_t i = 0; i < w.height.pixel_count(); ++i) {
    if (acq[0].cloud_prob.values()[i] != 0.0f || acq[1].cloud_prob.values()[i] != 0.0f) continue;
    ++clear;
    for (int b = 0; b < kImageBands; ++b) {
      ASSERT_EQ(acq[0].image.band(b)[i], acq[1].image.band(b)[i]);
    }
  }
  EXPECT_GT(clear, 0u);
}

TEST(GenerateImagesTest, CloudyPixelsAreBrighter) {
  WorldConfig cfg = SmallWorld();
  cfg.cloud_fraction = 0.3;
  World w = GenerateWorld(cfg);
  const auto acq = GenerateImages(w.height, cfg, 1);
  for (size_t i = 0; i < w.height.pixel_count(); ++i) {
    const float p = acq[0].cloud_prob.values()[i];
    if (p == 0.0f) continue;
    ASSERT_GE(p, 0.3f);
    const double clear = BandSignal(0, w.height.values()[i], cfg.max_height);
    ASSERT_GT(acq[0].image.band(0)[i], clear - 0.05);
  }
}

std::pair<int, int> GlobalPosition(const FootprintSample& f, const WorldConfig& cfg) {
  const int per_side = (cfg.extent + cfg.tile_size - 1) / cfg.tile_size;
  return {(f.tile_id % per_side) * cfg.tile_size + f.center_col,
          (f.tile_id / per_side) * cfg.tile_size + f.center_row};
}

TEST(GenerateFootprintsTest, FullDensityNoiselessLabelsEqualHeights) {
  WorldConfig cfg = SmallWorld(96);
  cfg.tile_size = 32;
  cfg.footprint_density = 1e4;  // one sample per 10 m pixel
  cfg.label_noise_sd = 0.0;
  cfg.geolocation_jitter = 0.0;
  World w = GenerateWorld(cfg);
  const auto fps = GenerateFootprints(w.height, cfg);
  ASSERT_EQ(fps.size(), w.height.pixel_count());
  for (const auto& f : fps) {
    auto [c, r] = GlobalPosition(f, cfg);
    ASSERT_EQ(TileIdOf(c, r, cfg.extent, cfg.tile_size), f.tile_id);
    ASSERT_EQ(f.canopy_top_height, w.height.at(0, r, c));
  }
}

TEST(GenerateFootprintsTest, CountWithinThreeSigmaOfBinomial) {
  for (uint64_t seed : {1, 2, 3, 4, 5}) {
    WorldConfig cfg = SmallWorld(256);
    cfg.seed = seed;
    World w = GenerateWorld(cfg);
    const double n = static_cast<double>(w.height.pixel_count());
    const double p = cfg.footprint_density * 1e-4;
    const double count = static_cast<double>(GenerateFootprints(w.height, cfg).size());
    EXPECT_LE(std::abs(count - n * p), 3.0 * std::sqrt(n * p * (1.0 - p))) << seed;
  }
}

TEST(GenerateFootprintsTest, JitterDegradesLabelsMonotonically) {
  // Label RMSE against the true height at the recorded position, which is
  // what a downstream model is trained on.
  WorldConfig cfg = SmallWorld(256);
  cfg.correlation_length = 6.0;
  cfg.label_noise_sd = 0.0;
  World w = GenerateWorld(cfg);
  double previous = -1.0;
  for (double jitter : {0.0, 1.0, 2.0}) {
    cfg.geolocation_jitter = jitter;
    double se = 0.0;
    const auto fps = GenerateFootprints(w.height, cfg);
    for (const auto& f : fps) {
      auto [c, r] = GlobalPosition(f, cfg);
      const double d = f.canopy_top_height - w.height.at(0, r, c);
      se += d * d;
    }
    const double rmse = std::sqrt(se / fps.size());
    if (jitter == 0.0) {
      EXPECT_EQ(rmse, 0.0);
    } else {
      EXPECT_GT(rmse, previous) << jitter;
    }
    previous = rmse;
  }
}

TEST(BlockAverageTest, AveragesFullAndPartialBlocks) {
  Grid g(4, 3, 1, GeoTransform{0.0, 30.0, 10.0});
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 4; ++c) g.at(0, r, c) = static_cast<float>(r * 4 + c);
  }
  Grid out = BlockAverage(g, 3);
  ASSERT_EQ(out.width(), 2);
  ASSERT_EQ(out.height(), 1);
  EXPECT_EQ(out.transform().pixel_size, 30.0);
  EXPECT_FLOAT_EQ(out.at(0, 0, 0), (0 + 1 + 2 + 4 + 5 + 6 + 8 + 9 + 10) / 9.0f);
  EXPECT_FLOAT_EQ(out.at(0, 0, 1), (3 + 7 + 11) / 3.0f);
}

TEST(WorldConfigTest, JsonRoundTripAndValidation) {
  WorldConfig cfg = SmallWorld();
  cfg.cloud_fraction = 0.25;
  EXPECT_EQ(ToJson(WorldConfigFromJson(ToJson(cfg))), ToJson(cfg));
  cfg.cloud_fraction = 1.5;
  EXPECT_ANY_THROW(Validate(cfg));
}

}  // namespace
}  // namespace hcs
