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

#ifndef HCSMAP_CANOPY_TRAIN_H_
#define HCSMAP_CANOPY_TRAIN_H_

#include <string>
#include <vector>

#include "canopy/dataset.h"
#include "nn/checkpoint.h"

namespace hcs {

struct TraceEntry {
  int iteration = 0;
  double train_loss = 0.0;  // moving average since the previous entry, m^2
  double val_rmse = 0.0;    // meters
};

struct CanopyTrainResult {
  Checkpoint checkpoint;  // best-validation parameters
  std::vector<TraceEntry> trace;
  TileSplit split;
  int best_iteration = 0;
  double best_val_rmse = 0.0;
  bool diverged = false;
  std::string message;
};

// Mini-batch training of the residual canopy regressor on the centred
// receptive-field crop of every patch. Batches are drawn with replacement
// from the training tiles; the checkpoint keeps the parameters with the
// lowest masked RMSE on the held-out tiles. A non-finite loss or gradient
// stops training and sets `diverged`, keeping the trace so far.
CanopyTrainResult TrainCanopy(const Dataset& dataset, const TrainConfig& cfg);
CanopyTrainResult TrainCanopy(const Dataset& dataset, const TrainConfig& cfg,
                              const TileSplit& split);

// Height predictions (meters, clamped at 0) for the given records.
std::vector<double> PredictRecords(const Model& model, const Dataset& dataset,
                                   const std::vector<size_t>& indices,
                                   int threads = 1);

// Indices of records whose tile is in `tiles`, optionally restricted to one
// source.
std::vector<size_t> RecordsInTiles(const Dataset& dataset,
                                   const std::vector<int>& tiles,
                                   const FootprintSource* source = nullptr);

nlohmann::json TraceToJson(const std::vector<TraceEntry>& trace);

}  // namespace hcs

#endif  // HCSMAP_CANOPY_TRAIN_H_
