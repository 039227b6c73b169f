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

#include "synth/world.h"

#include <algorithm>
#include <cmath>
#include <random>

#include "common/error.h"
#include "common/seed.h"
#include "synth/value_noise.h"

namespace hcs {
namespace {

enum Stream : uint64_t {
  kHeightField = 1,
  kCarbonNoise,
  kZones,
  kImages,
  kFootprints,
  kPalm,
  kCoconut,
  kUrban,
};

Grid MakeGrid(const WorldConfig& cfg, int bands = 1, double pixel_size = 0.0) {
  GeoTransform t;
  t.origin_x = 0.0;
  t.origin_y = cfg.extent * cfg.pixel_size;
  t.pixel_size = pixel_size > 0.0 ? pixel_size : cfg.pixel_size;
  const int n = static_cast<int>(std::lround(cfg.extent * cfg.pixel_size / t.pixel_size));
  return Grid(n, n, bands, t);
}

// Density ramp inside the top `fraction` of a rank-uniform field.
Grid DensityLayer(const WorldConfig& cfg, double fraction, double peak,
                  uint64_t seed) {
  Grid g = MakeGrid(cfg);
  if (fraction <= 0.0) return g;
  const auto u = RankUniform(ValueNoise(cfg.extent, cfg.extent,
                                        cfg.correlation_length, seed));
  for (size_t i = 0; i < u.size(); ++i) {
    const double s = (u[i] - (1.0 - fraction)) / fraction;
    g.values()[i] = static_cast<float>(s > 0.0 ? peak * s : 0.0);
  }
  return g;
}

}  // namespace

nlohmann::json ToJson(const WorldConfig& c) {
  return {{"seed", c.seed},
          {"extent", c.extent},
          {"pixel_size", c.pixel_size},
          {"correlation_length", c.correlation_length},
          {"max_height", c.max_height},
          {"nonveg_fraction", c.nonveg_fraction},
          {"texture_noise_sd", c.texture_noise_sd},
          {"cloud_fraction", c.cloud_fraction},
          {"cloud_correlation_length", c.cloud_correlation_length},
          {"footprint_density", c.footprint_density},
          {"label_noise_sd", c.label_noise_sd},
          {"geolocation_jitter", c.geolocation_jitter},
          {"allometry_a", c.allometry_a},
          {"allometry_b", c.allometry_b},
          {"carbon_noise_sd", c.carbon_noise_sd},
          {"zone_count", c.zone_count},
          {"tile_size", c.tile_size},
          {"palm_fraction", c.palm_fraction},
          {"coconut_fraction", c.coconut_fraction},
          {"urban_fraction", c.urban_fraction}};
}

WorldConfig WorldConfigFromJson(const nlohmann::json& j) {
  WorldConfig c;
  auto get = [&](const char* key, auto& field) {
    if (j.contains(key)) field = j.at(key).get<std::decay_t<decltype(field)>>();
  };
  get("seed", c.seed);
  get("extent", c.extent);
  get("pixel_size", c.pixel_size);
  get("correlation_length", c.correlation_length);
  get("max_height", c.max_height);
  get("nonveg_fraction", c.nonveg_fraction);
  get("texture_noise_sd", c.texture_noise_sd);
  get("cloud_fraction", c.cloud_fraction);
  get("cloud_correlation_length", c.cloud_correlation_length);
  get("footprint_density", c.footprint_density);
  get("label_noise_sd", c.label_noise_sd);
  get("geolocation_jitter", c.geolocation_jitter);
  get("allometry_a", c.allometry_a);
  get("allometry_b", c.allometry_b);
  get("carbon_noise_sd", c.carbon_noise_sd);
  get("zone_count", c.zone_count);
  get("tile_size", c.tile_size);
  get("palm_fraction", c.palm_fraction);
  get("coconut_fraction", c.coconut_fraction);
  get("urban_fraction", c.urban_fraction);
  return c;
}

void Validate(const WorldConfig& c) {
  Require(c.extent > 0 && c.pixel_size > 0.0 && c.correlation_length > 0.0 &&
              c.max_height > 0.0 && c.footprint_density > 0.0 &&
              c.allometry_a > 0.0 && c.allometry_b > 0.0 && c.zone_count > 0 &&
              c.tile_size > 0 && c.cloud_correlation_length > 0.0,
          "world config values must be positive");
  Require(c.texture_noise_sd >= 0.0 && c.label_noise_sd >= 0.0 &&
              c.carbon_noise_sd >= 0.0 && c.geolocation_jitter >= 0,
          "noise levels must be non-negative");
  for (double f : {c.cloud_fraction, c.nonveg_fraction, c.palm_fraction,
                   c.coconut_fraction, c.urban_fraction}) {
    Require(f >= 0.0 && f <= 1.0, "fractions must lie in [0, 1]");
  }
  Require(c.nonveg_fraction < 1.0, "nonveg_fraction must be below 1");
}

World GenerateWorld(const WorldConfig& cfg) {
  Validate(cfg);
  const int n = cfg.extent;
  World w{MakeGrid(cfg), MakeGrid(cfg), MakeGrid(cfg), MakeGrid(cfg)};
  w.height.band_names() = {"canopy_height"};
  w.carbon.band_names() = {"carbon_density"};
  w.scene_class.band_names() = {"scene_class"};
  w.zones.band_names() = {"zone"};

  const auto u = RankUniform(ValueNoise(n, n, cfg.correlation_length,
                                        DeriveSeed(cfg.seed, kHeightField)));
  const double f = cfg.nonveg_fraction;
  for (size_t i = 0; i < u.size(); ++i) {
    const bool bare = u[i] < f;
    const double h = bare ? 0.0 : cfg.max_height * (u[i] - f) / (1.0 - f);
    w.height.values()[i] = static_cast<float>(h);
    w.scene_class.values()[i] = static_cast<float>(bare ? scene::kNotVegetated
                                                        : scene::kVegetation);
  }

  std::mt19937_64 carbon_rng(DeriveSeed(cfg.seed, kCarbonNoise));
  std::normal_distribution<double> carbon_noise(0.0, 1.0);
  for (size_t i = 0; i < u.size(); ++i) {
    const double h = w.height.values()[i];
    const double noise = cfg.carbon_noise_sd > 0.0
                             ? cfg.carbon_noise_sd * carbon_noise(carbon_rng)
                             : 0.0;
    const double c = cfg.allometry_a * std::pow(h, cfg.allometry_b) + noise;
    w.carbon.values()[i] = static_cast<float>(std::max(0.0, c));
  }

  std::mt19937_64 zone_rng(DeriveSeed(cfg.seed, kZones));
  std::uniform_real_distribution<double> pos(0.0, n);
  std::vector<std::pair<double, double>> sites(cfg.zone_count);
  for (auto& s : sites) s = {pos(zone_rng), pos(zone_rng)};
  for (int r = 0; r < n; ++r) {
    for (int c = 0; c < n; ++c) {
      int best = 0;
      double best_d = 1e300;
      for (int z = 0; z < cfg.zone_count; ++z) {
        const double dx = c + 0.5 - sites[z].first;
        const double dy = r + 0.5 - sites[z].second;
        const double d = dx * dx + dy * dy;
        if (d < best_d) {
          best_d = d;
          best = z;
        }
      }
      w.zones.at(0, r, c) = static_cast<float>(best + 1);
    }
  }
  return w;
}

double BandSignal(int band, double height, double max_height) {
  const double hn = height / max_height;
  const double amp = (band % 2 == 0 ? 1.0 : -1.0) * (0.10 + 0.02 * band);
  const double base = 0.25 + 0.02 * band;
  double g = 0.0;
  switch (band % 3) {
    case 0: g = hn; break;
    case 1: g = 1.0 - std::exp(-3.0 * hn); break;
    default: g = hn * hn; break;
  }
  return base + amp * g;
}

std::vector<Acquisition> GenerateImages(const Grid& height,
                                        const WorldConfig& cfg,
                                        int acquisitions) {
  Validate(cfg);
  Require(acquisitions >= 1, "at least one acquisition required");
  Require(height.bands() == 1, "height grid must have one band");
  constexpr double kCloudBrightness = 0.9;
  std::vector<Acquisition> out;
  for (int a = 0; a < acquisitions; ++a) {
    const uint64_t seed = DeriveSeed(DeriveSeed(cfg.seed, kImages), a);
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::normal_distribution<double> gauss(0.0, 1.0);

    Acquisition acq{Grid(height.width(), height.height(), kImageBands, height.transform()),
                    Grid(height.width(), height.height(), 1, height.transform())};
    acq.cloud_prob.band_names() = {"cloud_probability"};
    for (int b = 0; b < kImageBands; ++b) {
      acq.image.band_names()[b] = "B" + std::to_string(b + 1);
    }

    const double share = std::clamp(cfg.cloud_fraction * (0.5 + unit(rng)), 0.0, 1.0);
    if (share > 0.0) {
      const auto field = ValueNoise(height.width(), height.height(),
                                    cfg.cloud_correlation_length, rng());
      std::vector<double> sorted = field;
      const size_t k = static_cast<size_t>(std::floor((1.0 - share) * (sorted.size() - 1)));
      std::nth_element(sorted.begin(), sorted.begin() + k, sorted.end());
      const double thr = sorted[k];
      const double top = *std::max_element(field.begin(), field.end());
      for (size_t i = 0; i < field.size(); ++i) {
        if (field[i] < thr || share <= 0.0) continue;
        const double s = top > thr ? (field[i] - thr) / (top - thr) : 1.0;
        acq.cloud_prob.values()[i] = static_cast<float>(std::min(1.0, 0.3 + 0.7 * s));
      }
    }
    for (int b = 0; b < kImageBands; ++b) {
      for (size_t i = 0; i < height.pixel_count(); ++i) {
        double v = BandSignal(b, height.values()[i], cfg.max_height);
        if (cfg.texture_noise_sd > 0.0) v += cfg.texture_noise_sd * gauss(rng);
        const double p = acq.cloud_prob.values()[i];
        v = (1.0 - p) * v + p * kCloudBrightness;
        acq.image.band(b)[i] = static_cast<float>(v);
      }
    }
    acq.image.nodata_mask() = height.nodata_mask();
    acq.cloud_prob.nodata_mask() = height.nodata_mask();
    out.push_back(std::move(acq));
  }
  return out;
}

int TileCount(int extent, int tile_size) {
  const int per_side = (extent + tile_size - 1) / tile_size;
  return per_side * per_side;
}

int TileIdOf(int col, int row, int extent, int tile_size) {
  const int per_side = (extent + tile_size - 1) / tile_size;
  return (row / tile_size) * per_side + col / tile_size;
}

std::vector<FootprintSample> GenerateFootprints(const Grid& height,
                                                const WorldConfig& cfg) {
  Validate(cfg);
  const double pixel_km2 = std::pow(height.transform().pixel_size / 1000.0, 2);
  const double p = std::min(1.0, cfg.footprint_density * pixel_km2);
  std::mt19937_64 rng(DeriveSeed(cfg.seed, kFootprints));
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_int_distribution<int> jitter(-cfg.geolocation_jitter, cfg.geolocation_jitter);
  std::vector<FootprintSample> samples;
  for (int r = 0; r < height.height(); ++r) {
    for (int c = 0; c < height.width(); ++c) {
      if (p < 1.0 && unit(rng) >= p) continue;
      double label = height.at(0, r, c);
      if (cfg.label_noise_sd > 0.0) label += cfg.label_noise_sd * gauss(rng);
      int rc = c, rr = r;
      if (cfg.geolocation_jitter > 0) {
        rc = std::clamp(c + jitter(rng), 0, height.width() - 1);
        rr = std::clamp(r + jitter(rng), 0, height.height() - 1);
      }
      FootprintSample s;
      s.tile_id = TileIdOf(rc, rr, height.width(), cfg.tile_size);
      s.center_col = rc % cfg.tile_size;
      s.center_row = rr % cfg.tile_size;
      s.canopy_top_height = static_cast<float>(std::max(0.0, label));
      samples.push_back(s);
    }
  }
  return samples;
}

Overlays GenerateOverlays(const WorldConfig& cfg) {
  Validate(cfg);
  Overlays o{DensityLayer(cfg, cfg.palm_fraction, 0.8, DeriveSeed(cfg.seed, kPalm)),
             DensityLayer(cfg, cfg.coconut_fraction, 1.0, DeriveSeed(cfg.seed, kCoconut)),
             MakeGrid(cfg, 1, cfg.pixel_size * 10.0)};
  o.palm_density.band_names() = {"oil_palm_density"};
  o.coconut_density.band_names() = {"coconut_density"};
  o.urban_100m.band_names() = {"urban"};
  if (cfg.urban_fraction > 0.0) {
    const int n = o.urban_100m.width();
    const auto u = RankUniform(ValueNoise(n, n, std::max(1.0, cfg.correlation_length / 10.0),
                                          DeriveSeed(cfg.seed, kUrban)));
    for (size_t i = 0; i < u.size(); ++i) {
      o.urban_100m.values()[i] = u[i] >= 1.0 - cfg.urban_fraction ? 1.0f : 0.0f;
    }
  }
  return o;
}

Grid BlockAverage(const Grid& src, int factor) {
  Require(factor >= 1, "block factor must be positive");
  Require(!src.empty(), "empty input");
  const int w = (src.width() + factor - 1) / factor;
  const int h = (src.height() + factor - 1) / factor;
  GeoTransform t = src.transform();
  t.pixel_size *= factor;
  Grid out(w, h, src.bands(), t);
  out.band_names() = src.band_names();
  for (int r = 0; r < h; ++r) {
    const int r1 = std::min(src.height(), (r + 1) * factor);
    for (int c = 0; c < w; ++c) {
      const int c1 = std::min(src.width(), (c + 1) * factor);
      bool bad = false;
      for (int sr = r * factor; sr < r1; ++sr) {
        for (int sc = c * factor; sc < c1; ++sc) bad |= src.nodata(sr, sc);
      }
      out.set_nodata(r, c, bad);
      const int n = (r1 - r * factor) * (c1 - c * factor);
      for (int b = 0; b < src.bands(); ++b) {
        double sum = 0.0;
        for (int sr = r * factor; sr < r1; ++sr) {
          for (int sc = c * factor; sc < c1; ++sc) sum += src.at(b, sr, sc);
        }
        out.at(b, r, c) = static_cast<float>(sum / n);
      }
    }
  }
  return out;
}

}  // namespace hcs
