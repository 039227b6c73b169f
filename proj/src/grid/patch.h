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

#ifndef HCSMAP_GRID_PATCH_H_
#define HCSMAP_GRID_PATCH_H_

#include <cstdint>
#include <vector>

#include "grid/grid.h"
#include "nn/tensor.h"

namespace hcs {

// Mirror index into [0, n) without repeating the edge sample
// (-1 -> 1, n -> n - 2). Folds repeatedly for offsets beyond one period.
int ReflectIndex(int i, int n);

struct Patch {
  Tensor values;                // size x size x bands
  std::vector<uint8_t> padded;  // size x size, 1 where reflection filled in
  std::vector<uint8_t> nodata;  // size x size, source nodata flag
};

// size x size patch centred on (center_col, center_row); out-of-bounds cells
// are reflection padded and flagged. `size` must be odd.
Patch ExtractPatch(const Grid& image, int center_col, int center_row, int size);

// Copies the window [col0, col0 + width) x [row0, row0 + height) into a tensor,
// reflecting any part that leaves the grid.
Tensor ExtractWindow(const Grid& image, int col0, int row0, int width,
                     int height);

}  // namespace hcs

#endif  // HCSMAP_GRID_PATCH_H_
