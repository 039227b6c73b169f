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

#include "grid/tiles.h"

#include <algorithm>

#include "common/error.h"

namespace hcs {
namespace {

struct Span1D {
  int start, end, core_start, core_end;
};

std::vector<Span1D> Split(int n, int tile, int overlap) {
  std::vector<int> starts;
  for (int s = 0;; s += tile - overlap) {
    starts.push_back(s);
    if (s + tile >= n) break;
  }
  std::vector<Span1D> spans;
  int core_start = 0;
  for (size_t i = 0; i < starts.size(); ++i) {
    const int end = std::min(starts[i] + tile, n);
    const int core_end =
        i + 1 < starts.size() ? starts[i + 1] + overlap / 2 : n;
    spans.push_back({starts[i], end, core_start, core_end});
    core_start = core_end;
  }
  return spans;
}

}  // namespace

std::vector<TileWindow> IterateTiles(int width, int height, int tile,
                                     int overlap) {
  Require(width > 0 && height > 0, "empty grid");
  Require(overlap >= 0 && tile > 2 * overlap, "tile must exceed 2*overlap");
  const auto xs = Split(width, tile, overlap);
  const auto ys = Split(height, tile, overlap);
  std::vector<TileWindow> windows;
  windows.reserve(xs.size() * ys.size());
  for (const auto& y : ys) {
    for (const auto& x : xs) {
      windows.push_back({x.start, y.start, x.end - x.start, y.end - y.start,
                         x.core_start, y.core_start, x.core_end - x.core_start,
                         y.core_end - y.core_start});
    }
  }
  return windows;
}

}  // namespace hcs
