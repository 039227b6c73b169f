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

#include "grid/patch.h"

#include "common/error.h"

namespace hcs {

int ReflectIndex(int i, int n) {
  if (n == 1) return 0;
  const int period = 2 * (n - 1);
  i %= period;
  if (i < 0) i += period;
  return i < n ? i : period - i;
}

Patch ExtractPatch(const Grid& image, int center_col, int center_row,
                   int size) {
  Require(size > 0 && size % 2 == 1, "patch size must be odd");
  if (center_col < 0 || center_row < 0 || center_col >= image.width() ||
      center_row >= image.height()) {
    Fail(ErrorCode::kInvalidArgument, "patch center (", center_col, ", ",
         center_row, ") outside grid");
  }
  const int half = size / 2;
  Patch patch;
  patch.values = Tensor(size, size, image.bands());
  patch.padded.assign(static_cast<size_t>(size) * size, 0);
  patch.nodata.assign(static_cast<size_t>(size) * size, 0);
  for (int r = 0; r < size; ++r) {
    const int gr = center_row - half + r;
    const int sr = ReflectIndex(gr, image.height());
    for (int c = 0; c < size; ++c) {
      const int gc = center_col - half + c;
      const int sc = ReflectIndex(gc, image.width());
      const size_t cell = static_cast<size_t>(r) * size + c;
      patch.padded[cell] = (gr != sr || gc != sc) ? 1 : 0;
      patch.nodata[cell] = image.nodata(sr, sc) ? 1 : 0;
      double* px = patch.values.pixel(r, c);
      for (int b = 0; b < image.bands(); ++b) px[b] = image.at(b, sr, sc);
    }
  }
  return patch;
}

Tensor ExtractWindow(const Grid& image, int col0, int row0, int width,
                     int height) {
  Require(width > 0 && height > 0, "empty window");
  Tensor out(height, width, image.bands());
  for (int r = 0; r < height; ++r) {
    const int sr = ReflectIndex(row0 + r, image.height());
    for (int c = 0; c < width; ++c) {
      const int sc = ReflectIndex(col0 + c, image.width());
      double* px = out.pixel(r, c);
      for (int b = 0; b < image.bands(); ++b) px[b] = image.at(b, sr, sc);
    }
  }
  return out;
}

}  // namespace hcs
