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

#ifndef HCSMAP_NN_DENSE_H_
#define HCSMAP_NN_DENSE_H_

#include "grid/grid.h"
#include "nn/model.h"

namespace hcs {

struct DenseOptions {
  int tile = 128;
  int overlap = 8;  // must cover half the receptive field
  int threads = 1;
};

// Fully convolutional inference over a whole grid. Each window is read with a
// halo of half the receptive field (reflected at the grid edge) and run in
// valid mode, so every output pixel sees exactly the context it would see in
// a single whole-grid pass. Returns the raw output channels (normalised
// units) with the input's nodata mask.
Grid DenseInference(const Model& model, const Grid& input,
                    const DenseOptions& options);

}  // namespace hcs

#endif  // HCSMAP_NN_DENSE_H_
