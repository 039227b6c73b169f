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

#ifndef HCSMAP_HCS_HCS_H_
#define HCSMAP_HCS_HCS_H_

#include <array>
#include <cstdint>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "grid/grid.h"

namespace hcs {

// Class codes as stored in class grids.
enum class HcsClass : uint8_t {
  kOpenLand = 0,
  kScrub = 1,
  kYoungRegeneratingForest = 2,
  kLowDensityForest = 3,
  kMediumDensityForest = 4,
  kHighDensityForest = 5,
  kPlantationOilPalm = 6,
  kPlantationCoconut = 7,
  kUrban = 8,
  kNoData = 9,
};
constexpr int kHcsClassCount = 10;
constexpr int kCarbonClassCount = 6;

enum class BinaryClass : uint8_t { kOls = 0, kHcs = 1, kOther = 2 };

std::string_view ClassName(HcsClass c);       // "OL", "S", ..., "NoData"
std::string_view BinaryName(BinaryClass c);   // "OLS", "HCS", "Other"

struct HcsThresholds {
  std::vector<double> breakpoints = {15.0, 35.0, 75.0, 90.0, 150.0};
  double hcs_cutoff = 35.0;

  bool operator==(const HcsThresholds&) const = default;
};

struct OverlayThresholds {
  double oil_palm_density = 0.2;  // trees per pixel, strictly exceeded
  double coconut_density = 0.4;

  bool operator==(const OverlayThresholds&) const = default;
};

void Validate(const HcsThresholds& t);
void Validate(const OverlayThresholds& t);
nlohmann::json ToJson(const HcsThresholds& t);
nlohmann::json ToJson(const OverlayThresholds& t);
HcsThresholds HcsThresholdsFromJson(const nlohmann::json& j);
OverlayThresholds OverlayThresholdsFromJson(const nlohmann::json& j);

// Half-open, lower-inclusive intervals: [0,15) OL, [15,35) S, [35,75) YRF,
// [75,90) LDF, [90,150) MDF, [150,inf) HDF. Negative or NaN density throws.
HcsClass ClassifyCarbon(double density, const HcsThresholds& t = {});

BinaryClass BinaryCollapse(HcsClass c);

// Class-code grid from a carbon density grid; nodata pixels get NoData.
Grid ClassifyCarbonGrid(const Grid& carbon, const HcsThresholds& t = {});

// Nearest-neighbour resampling of a categorical layer onto `target`'s grid.
Grid NearestOnto(const Grid& categorical, const Grid& target);

// Urban > oil palm > coconut > carbon class. Plantation masks trigger when
// the density strictly exceeds its threshold; urban when the value is
// non-zero. All inputs must be aligned with `classes`.
Grid Overlay(const Grid& classes, const Grid& palm_density,
             const Grid& coconut_density, const Grid& urban,
             const OverlayThresholds& t = {});

// Fixed RGB palette indexed by class code.
const std::array<std::array<uint8_t, 3>, kHcsClassCount>& ClassPalette();

// Legend: code, short name, description, colour, carbon range.
nlohmann::json ClassLegend(const HcsThresholds& t = {});

}  // namespace hcs

#endif  // HCSMAP_HCS_HCS_H_
