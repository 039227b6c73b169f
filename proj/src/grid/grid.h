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

#ifndef HCSMAP_GRID_GRID_H_
#define HCSMAP_GRID_GRID_H_

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace hcs {

// North-up affine geometry with square pixels. (origin_x, origin_y) is the map
// coordinate of the upper-left corner of pixel (0, 0).
struct GeoTransform {
  double origin_x = 0.0;
  double origin_y = 0.0;
  double pixel_size = 10.0;

  std::pair<double, double> PixelToMap(double col, double row) const {
    return {origin_x + col * pixel_size, origin_y - row * pixel_size};
  }
  std::pair<double, double> PixelCenter(int col, int row) const {
    return PixelToMap(col + 0.5, row + 0.5);
  }
  // Fractional pixel coordinates of a map point.
  std::pair<double, double> MapToPixel(double x, double y) const {
    return {(x - origin_x) / pixel_size, (origin_y - y) / pixel_size};
  }
  // Index of the pixel containing a map point.
  std::pair<int, int> MapToPixelIndex(double x, double y) const {
    auto [c, r] = MapToPixel(x, y);
    return {static_cast<int>(std::floor(c)), static_cast<int>(std::floor(r))};
  }

  bool operator==(const GeoTransform&) const = default;
};

// Georeferenced multi-band raster of 32-bit values, band-major, with a
// per-pixel nodata mask shared by all bands.
class Grid {
 public:
  Grid() = default;
  Grid(int width, int height, int bands, GeoTransform transform = {});

  int width() const { return width_; }
  int height() const { return height_; }
  int bands() const { return bands_; }
  size_t pixel_count() const {
    return static_cast<size_t>(width_) * height_;
  }
  bool empty() const { return pixel_count() == 0 || bands_ == 0; }
  const GeoTransform& transform() const { return transform_; }

  float& at(int band, int row, int col) {
    return values_[Offset(band, row, col)];
  }
  float at(int band, int row, int col) const {
    return values_[Offset(band, row, col)];
  }
  std::span<float> band(int b) {
    return {values_.data() + static_cast<size_t>(b) * pixel_count(),
            pixel_count()};
  }
  std::span<const float> band(int b) const {
    return {values_.data() + static_cast<size_t>(b) * pixel_count(),
            pixel_count()};
  }

  bool nodata(int row, int col) const {
    return nodata_[static_cast<size_t>(row) * width_ + col] != 0;
  }
  void set_nodata(int row, int col, bool value) {
    nodata_[static_cast<size_t>(row) * width_ + col] = value ? 1 : 0;
  }
  size_t valid_count() const;

  std::vector<float>& values() { return values_; }
  const std::vector<float>& values() const { return values_; }
  std::vector<uint8_t>& nodata_mask() { return nodata_; }
  const std::vector<uint8_t>& nodata_mask() const { return nodata_; }

  std::vector<std::string>& band_names() { return band_names_; }
  const std::vector<std::string>& band_names() const { return band_names_; }

  bool SameGeometry(const Grid& other) const {
    return width_ == other.width_ && height_ == other.height_ &&
           transform_ == other.transform_;
  }

  bool operator==(const Grid&) const = default;

 private:
  size_t Offset(int band, int row, int col) const {
    return static_cast<size_t>(band) * pixel_count() +
           static_cast<size_t>(row) * width_ + col;
  }

  int width_ = 0;
  int height_ = 0;
  int bands_ = 0;
  GeoTransform transform_;
  std::vector<float> values_;
  std::vector<uint8_t> nodata_;
  std::vector<std::string> band_names_;
};

// Sub-window copy with its transform shifted accordingly.
Grid CropGrid(const Grid& src, int col0, int row0, int width, int height);

// Single band of a multi-band grid, sharing geometry and mask.
Grid SelectBand(const Grid& src, int band);

// Throws unless both grids share dimensions and transform.
void RequireAligned(const Grid& a, const Grid& b, const char* what);

}  // namespace hcs

#endif  // HCSMAP_GRID_GRID_H_
