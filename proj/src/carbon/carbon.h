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

#ifndef HCSMAP_CARBON_CARBON_H_
#define HCSMAP_CARBON_CARBON_H_

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include <json.hpp>

#include "evalstats/evalstats.h"
#include "grid/grid.h"
#include "nn/checkpoint.h"
#include "nn/dense.h"

namespace hcs {

constexpr int kEnsembleSize = 5;

struct PixelRect {
  int col0 = 0, row0 = 0, width = 0, height = 0;

  bool empty() const { return width <= 0 || height <= 0; }
  bool Contains(int col, int row) const {
    return col >= col0 && row >= row0 && col < col0 + width && row < row0 + height;
  }
  bool Overlaps(const PixelRect& o) const;
  bool operator==(const PixelRect&) const = default;
};

nlohmann::json ToJson(const PixelRect& r);
PixelRect PixelRectFromJson(const nlohmann::json& j);

// Geographic split into disjoint column bands: training on the left,
// validation (monitoring only) next to it, test on the right.
struct RegionSplit {
  PixelRect train;
  PixelRect val;
  PixelRect test;
};

RegionSplit ColumnSplit(int width, int height, double test_fraction,
                        double val_fraction);
// Throws when the regions overlap, leave the grid, or train/test is empty.
void ValidateSplit(const RegionSplit& split, int width, int height);

struct CarbonConfig {
  int window = 64;
  int epochs = 100;
  double learning_rate = 1e-4;
  int width = 32;
  int conv_layers = 7;
  bool power_law = false;
  double test_fraction = 0.10;
  double val_fraction = 0.10;  // of the training columns
  std::vector<uint64_t> seeds = {1, 2, 3, 4, 5};
  int threads = 1;

  bool operator==(const CarbonConfig&) const = default;
};

nlohmann::json ToJson(const CarbonConfig& cfg);
CarbonConfig CarbonConfigFromJson(const nlohmann::json& j);
void Validate(const CarbonConfig& cfg);

struct EpochRecord {
  int epoch = 0;
  double train_loss = 0.0;  // mean NLL over the epoch's windows
  double val_rmse = 0.0;    // Mg C / ha, NaN without a validation region
};

struct CarbonEnsemble {
  std::vector<Checkpoint> members;
  std::vector<uint64_t> seeds;
  nlohmann::json config;
};

// Trains one member on the training region only. Windows of cfg.window
// pixels are read with a reflected halo confined to the training region and
// visited once per epoch in a seeded order; pixels that are nodata in either
// grid, or set in `loss_mask`, carry no loss. Parameters of the final epoch
// are kept.
Checkpoint TrainCarbonMember(const Grid& height, const Grid& carbon_ref,
                             const RegionSplit& split, uint64_t seed,
                             const CarbonConfig& cfg,
                             const Grid* loss_mask = nullptr,
                             std::vector<EpochRecord>* trace = nullptr);

// Five members differing only in seed; members train in parallel up to
// cfg.threads.
CarbonEnsemble TrainCarbonEnsemble(const Grid& height, const Grid& carbon_ref,
                                   const RegionSplit& split,
                                   const CarbonConfig& cfg,
                                   const Grid* loss_mask = nullptr,
                                   std::vector<std::vector<EpochRecord>>* traces = nullptr);

struct CarbonPrediction {
  Grid mean;      // Mg C / ha, >= 0
  Grid variance;  // (Mg C / ha)^2
};

// Member output in physical units: band 0 mean (unclamped), band 1 variance.
Grid PredictMember(const Model& model, const Grid& height,
                   const DenseOptions& options = {});

// Mean of member means clamped at 0; variance = mean member variance plus the
// population variance of the member means.
CarbonPrediction PredictCarbon(const CarbonEnsemble& ensemble, const Grid& height,
                               const DenseOptions& options = {});

struct DecileRow {
  int decile = 0;
  double ref_min = 0.0, ref_max = 0.0;
  double ref_mean = 0.0, pred_mean = 0.0;
  int64_t count = 0;
};

// Binning by a noisy reference already flattens the top decile somewhat, so
// only a much smaller slope counts as saturation.
constexpr double kSaturationRatio = 0.25;

struct CarbonEvalReport {
  RegressionMetrics metrics;
  std::vector<DecileRow> deciles;  // by reference decile
  // Top-decile slope of mean prediction against mean reference divided by
  // the overall (first-to-last decile) slope.
  double saturation_ratio = 1.0;
  bool saturated = false;  // ratio below kSaturationRatio
};

CarbonEvalReport EvaluateCarbon(const CarbonPrediction& pred, const Grid& carbon_ref,
                                const PixelRect& test_region);

nlohmann::json ToJson(const CarbonEvalReport& report);

// Directory of member_<i>.nnp1 files plus ensemble.json.
void WriteEnsemble(const std::filesystem::path& dir, const CarbonEnsemble& ensemble);
CarbonEnsemble ReadEnsemble(const std::filesystem::path& dir);

}  // namespace hcs

#endif  // HCSMAP_CARBON_CARBON_H_
