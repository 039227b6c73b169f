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

#ifndef HCSMAP_GRID_RESAMPLE_H_
#define HCSMAP_GRID_RESAMPLE_H_

#include <span>
#include <vector>

#include "grid/grid.h"

namespace hcs {

// Output dimension for a resample that preserves the map extent: the extent
// divided by the new pixel size, rounded to the nearest integer (at least 1).
int ResampledExtent(int pixels, double src_pixel_size, double dst_pixel_size);

// Bilinear interpolation between the four source pixel centers around each
// output pixel center. Output pixels on the outer rim whose centers fall
// outside the source center lattice use the edge stencil, i.e. linear
// extrapolation, so affine fields are reproduced exactly everywhere. An output
// pixel is nodata when any stencil pixel with non-zero weight is nodata.
Grid BilinearResample(const Grid& src, double target_pixel_size);

// Nearest-neighbour resample for categorical layers.
Grid NearestResample(const Grid& src, double target_pixel_size);

// Brings separately gridded bands (one single-band grid per entry, each at its
// native pixel size) onto a common grid at `target_pixel_size`. Native sizes
// must be integer multiples of the target.
Grid UpsampleBands(std::span<const Grid> bands,
                   std::span<const double> band_native_sizes,
                   double target_pixel_size = 10.0);

}  // namespace hcs

#endif  // HCSMAP_GRID_RESAMPLE_H_
