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

#ifndef HCSMAP_GRID_TILES_H_
#define HCSMAP_GRID_TILES_H_

#include <vector>

namespace hcs {

// A processing window and the core it is responsible for. Cores of all
// windows partition the grid; windows of neighbours overlap.
struct TileWindow {
  int col0, row0, width, height;
  int core_col0, core_row0, core_width, core_height;
};

// Windows of `tile` pixels placed every tile - overlap pixels along each axis
// (the last window is clipped at the grid edge), so neighbours share exactly
// `overlap` pixels. Each shared strip is split at its midpoint between the two
// cores. Requires tile > 2 * overlap.
std::vector<TileWindow> IterateTiles(int width, int height, int tile,
                                     int overlap);

}  // namespace hcs

#endif  // HCSMAP_GRID_TILES_H_
