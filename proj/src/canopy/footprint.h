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

#ifndef HCSMAP_CANOPY_FOOTPRINT_H_
#define HCSMAP_CANOPY_FOOTPRINT_H_

#include <cstdint>

namespace hcs {

enum class FootprintSource : uint8_t {
  kLidarFootprint = 0,
  kForcedZero = 1,  // non-vegetated scene class, height fixed at 0
};

// One sparse reference observation. Pixel coordinates are local to the tile.
struct FootprintSample {
  int tile_id = 0;
  int center_col = 0;
  int center_row = 0;
  float canopy_top_height = 0.0f;  // meters, >= 0
  FootprintSource source = FootprintSource::kLidarFootprint;

  bool operator==(const FootprintSample&) const = default;
};

// Scene classification codes (Sentinel-2 L2A SCL convention).
namespace scene {
constexpr int kNoData = 0;
constexpr int kVegetation = 4;
constexpr int kNotVegetated = 5;
constexpr int kWater = 6;
constexpr int kCloudMedium = 8;
constexpr int kCloudHigh = 9;

inline bool IsNonVegetated(int code) {
  return code == kNotVegetated || code == kWater;
}
}  // namespace scene

}  // namespace hcs

#endif  // HCSMAP_CANOPY_FOOTPRINT_H_
