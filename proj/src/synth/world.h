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

#ifndef HCSMAP_SYNTH_WORLD_H_
#define HCSMAP_SYNTH_WORLD_H_

#include <cstdint>
#include <vector>

#include <json.hpp>

#include "canopy/footprint.h"
#include "grid/grid.h"

namespace hcs {

struct WorldConfig {
  uint64_t seed = 1;
  int extent = 256;                  // pixels per side
  double pixel_size = 10.0;          // meters
  double correlation_length = 24.0;  // pixels, 1/e lag of the height field
  double max_height = 55.0;          // meters
  double nonveg_fraction = 0.10;     // share of pixels that are bare (h = 0)
  double texture_noise_sd = 0.005;   // reflectance units
  double cloud_fraction = 0.10;      // mean cloudy share per acquisition
  double cloud_correlation_length = 16.0;
  double footprint_density = 300.0;  // samples per km^2
  double label_noise_sd = 2.0;       // meters
  int geolocation_jitter = 1;        // pixels, uniform in [-j, j] per axis
  double allometry_a = 1.7;
  double allometry_b = 1.2;
  double carbon_noise_sd = 10.0;     // Mg C / ha
  int zone_count = 4;
  int tile_size = 128;               // footprint tiling, pixels
  double palm_fraction = 0.05;
  double coconut_fraction = 0.03;
  double urban_fraction = 0.03;

  bool operator==(const WorldConfig&) const = default;
};

nlohmann::json ToJson(const WorldConfig& cfg);
WorldConfig WorldConfigFromJson(const nlohmann::json& j);
void Validate(const WorldConfig& cfg);

struct World {
  Grid height;       // meters, 1 band
  Grid carbon;       // Mg C / ha, 1 band, with noise
  Grid scene_class;  // SCL codes
  Grid zones;        // labels 1..zone_count
};

// Smooth value-noise height field, rank-mapped so heights are uniform over
// (0, max_height] on vegetated pixels; the lowest nonveg_fraction of the
// field is bare ground (height 0, scene class not-vegetated). Carbon follows
// a * h^b plus Gaussian noise, clamped at 0. Zones are a seeded Voronoi
// partition.
World GenerateWorld(const WorldConfig& cfg);

struct Acquisition {
  Grid image;       // 12 bands
  Grid cloud_prob;  // [0, 1]
};

constexpr int kImageBands = 12;

// Noise-free reflectance of band `band` for a canopy height (meters).
double BandSignal(int band, double height, double max_height);

// Each acquisition: 12 bands as fixed smooth functions of height plus iid
// texture noise, blended toward a bright constant under clouds. Cloud
// probability is a thresholded smooth field whose cloudy share varies per
// acquisition around cfg.cloud_fraction.
std::vector<Acquisition> GenerateImages(const Grid& height,
                                        const WorldConfig& cfg,
                                        int acquisitions);

// Seeded Bernoulli sampling at footprint_density; labels are the true height
// plus label noise (clamped at 0) and the recorded position carries the
// geolocation jitter. Tile ids and local coordinates follow cfg.tile_size.
std::vector<FootprintSample> GenerateFootprints(const Grid& height,
                                                const WorldConfig& cfg);

struct Overlays {
  Grid palm_density;     // trees per pixel, 10 m
  Grid coconut_density;  // trees per pixel, 10 m
  Grid urban_100m;       // 0/1 at 100 m
};

Overlays GenerateOverlays(const WorldConfig& cfg);

// factor x factor block means (partial blocks at the right and bottom edge
// average what they cover), e.g. a 10 m field as a 30 m product.
Grid BlockAverage(const Grid& src, int factor);

// Tile layout used by footprints and dataset construction.
int TileCount(int extent, int tile_size);
int TileIdOf(int col, int row, int extent, int tile_size);

}  // namespace hcs

#endif  // HCSMAP_SYNTH_WORLD_H_
