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

#ifndef HCSMAP_CANOPY_PREDICT_H_
#define HCSMAP_CANOPY_PREDICT_H_

#include <span>
#include <vector>

#include "grid/grid.h"
#include "nn/dense.h"
#include "nn/model.h"

namespace hcs {

// Dense canopy height map (meters, negative outputs clamped to 0).
Grid PredictDense(const Model& model, const Grid& image,
                  const DenseOptions& options = {});

constexpr float kCompositeCloudThreshold = 0.10f;

// Per-pixel mean of the predictions whose cloud probability is below 0.10;
// pixels without any such prediction are nodata. Qualifying values are
// summed in ascending order in 64-bit, so the result does not depend on the
// order of the input list.
Grid Composite(std::span<const Grid> predictions,
               std::span<const Grid> cloud_probs);

// Indices of the k acquisitions with the smallest mean cloud probability,
// ties broken by position in the list.
std::vector<size_t> SelectLeastCloudy(std::span<const Grid> cloud_probs,
                                      size_t k);

// Mean cloud probability over valid pixels (nodata counts as fully cloudy).
double MeanCloudProbability(const Grid& cloud_prob);

}  // namespace hcs

#endif  // HCSMAP_CANOPY_PREDICT_H_
