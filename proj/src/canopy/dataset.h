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

#ifndef HCSMAP_CANOPY_DATASET_H_
#define HCSMAP_CANOPY_DATASET_H_

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "canopy/footprint.h"
#include "grid/grid.h"
#include "nn/tensor.h"

namespace hcs {

struct TrainConfig {
  int patch_size = 15;
  int batch_size = 64;
  int iterations = 20000;
  double learning_rate = 1e-4;
  uint64_t seed = 1;
  double holdout_fraction = 0.10;
  double cloud_pixel_threshold = 0.10;
  double cloud_prob_threshold = 0.10;
  double zero_cap_fraction = 0.20;  // forced_zero share of the dataset
  int eval_every = 500;             // iterations between trace entries
  int width = 16;                   // residual stack width
  int blocks = 3;                   // residual blocks
  int threads = 1;

  bool operator==(const TrainConfig&) const = default;
};

nlohmann::json ToJson(const TrainConfig& cfg);
TrainConfig TrainConfigFromJson(const nlohmann::json& j);
void Validate(const TrainConfig& cfg);

// One co-registered acquisition of one tile. Several entries may share a
// tile_id (repeat acquisitions); footprints are matched by tile_id.
struct TileInput {
  int tile_id = 0;
  Grid image;        // 12 bands, 10 m
  Grid cloud_prob;   // 1 band
  Grid scene_class;  // 1 band, SCL codes
};

struct Dataset {
  int patch_size = 0;  // 0: footprint list without patches
  int bands = 0;
  std::vector<FootprintSample> records;
  std::vector<float> patches;  // records x size x size x bands, HWC
  std::vector<int> tiles;      // sorted distinct tile ids
  nlohmann::json config;       // echo of the building configuration
  int64_t skipped_outside = 0;
  int64_t dropped_cloudy = 0;

  size_t size() const { return records.size(); }
  size_t patch_stride() const {
    return static_cast<size_t>(patch_size) * patch_size * bands;
  }
  std::span<const float> patch(size_t i) const {
    return {patches.data() + i * patch_stride(), patch_stride()};
  }
  // The centred `size` x `size` crop of record i as a tensor.
  Tensor CenterCrop(size_t i, int size) const;

  size_t CountSource(FootprintSource source) const;
};

// True when more than cfg.cloud_pixel_threshold of the patch cells have
// cloud probability above cfg.cloud_prob_threshold (nodata counts as cloudy).
bool PatchIsCloudy(const Grid& cloud_prob, int center_col, int center_row,
                   const TrainConfig& cfg);

// One record per retained footprint with its patch and height. Footprints on
// non-vegetated scene-class pixels become forced_zero records; further
// forced_zero records are drawn from non-vegetated pixels (seeded) until the
// forced_zero share reaches cfg.zero_cap_fraction, and existing ones are
// subsampled if they exceed it.
Dataset BuildDataset(std::span<const TileInput> tiles,
                     std::span<const FootprintSample> footprints,
                     const TrainConfig& cfg);

// Footprint list container (patch_size 0).
Dataset FootprintDataset(std::span<const FootprintSample> footprints);

// FPD1: "FPD1" | u32 header_length | JSON index | float32 patch payload.
std::string EncodeFpd1(const Dataset& dataset);
Dataset DecodeFpd1(std::string_view bytes);
void WriteFpd1(const std::filesystem::path& path, const Dataset& dataset);
Dataset ReadFpd1(const std::filesystem::path& path);

// Disjoint, exhaustive split with ceil(fraction * N) validation tiles.
struct TileSplit {
  std::vector<int> train;
  std::vector<int> val;
};
TileSplit SplitTiles(std::span<const int> tile_ids, double holdout_fraction,
                     uint64_t seed);

}  // namespace hcs

#endif  // HCSMAP_CANOPY_DATASET_H_
