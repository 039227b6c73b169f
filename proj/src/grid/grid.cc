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

#include "grid/grid.h"

#include <algorithm>

#include "common/error.h"

namespace hcs {

Grid::Grid(int width, int height, int bands, GeoTransform transform)
    : width_(width), height_(height), bands_(bands), transform_(transform) {
  Require(width >= 0 && height >= 0 && bands >= 0, "negative grid dimension");
  Require(transform.pixel_size > 0.0, "pixel size must be positive");
  values_.assign(pixel_count() * bands, 0.0f);
  nodata_.assign(pixel_count(), 0);
  for (int b = 0; b < bands; ++b) band_names_.push_back("b" + std::to_string(b));
}

size_t Grid::valid_count() const {
  return static_cast<size_t>(
      std::count(nodata_.begin(), nodata_.end(), uint8_t{0}));
}

Grid CropGrid(const Grid& src, int col0, int row0, int width, int height) {
  Require(col0 >= 0 && row0 >= 0 && width > 0 && height > 0 &&
              col0 + width <= src.width() && row0 + height <= src.height(),
          "crop window outside grid");
  GeoTransform t = src.transform();
  auto [x, y] = t.PixelToMap(col0, row0);
  t.origin_x = x;
  t.origin_y = y;
  Grid out(width, height, src.bands(), t);
  out.band_names() = src.band_names();
  for (int b = 0; b < src.bands(); ++b) {
    for (int r = 0; r < height; ++r) {
      for (int c = 0; c < width; ++c) out.at(b, r, c) = src.at(b, row0 + r, col0 + c);
    }
  }
  for (int r = 0; r < height; ++r) {
    for (int c = 0; c < width; ++c) out.set_nodata(r, c, src.nodata(row0 + r, col0 + c));
  }
  return out;
}

Grid SelectBand(const Grid& src, int band) {
  Require(band >= 0 && band < src.bands(), "band index out of range");
  Grid out(src.width(), src.height(), 1, src.transform());
  std::copy(src.band(band).begin(), src.band(band).end(), out.band(0).begin());
  out.nodata_mask() = src.nodata_mask();
  out.band_names() = {src.band_names()[band]};
  return out;
}

void RequireAligned(const Grid& a, const Grid& b, const char* what) {
  if (!a.SameGeometry(b)) {
    Fail(ErrorCode::kInvalidArgument, "grid misalignment: ", what, " (",
         a.width(), "x", a.height(), " vs ", b.width(), "x", b.height(), ")");
  }
}

}  // namespace hcs
