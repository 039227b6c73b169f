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

#include "grid/resample.h"

#include <algorithm>
#include <cmath>

#include "common/error.h"

namespace hcs {
namespace {

struct Stencil {
  int i0;
  int i1;
  double t;  // weight of i1; may fall outside [0, 1] on the rim
};

Stencil MakeStencil(double pos, int n) {
  if (n == 1) return {0, 0, 0.0};
  const int i0 = std::clamp(static_cast<int>(std::floor(pos)), 0, n - 2);
  return {i0, i0 + 1, pos - i0};
}

}  // namespace

int ResampledExtent(int pixels, double src_pixel_size, double dst_pixel_size) {
  const long n = std::lround(pixels * src_pixel_size / dst_pixel_size);
  return static_cast<int>(std::max(1L, n));
}

Grid BilinearResample(const Grid& src, double target_pixel_size) {
  if (src.empty()) Fail(ErrorCode::kInvalidArgument, "empty input");
  Require(target_pixel_size > 0.0, "target pixel size must be positive");
  const double src_size = src.transform().pixel_size;
  const int w = ResampledExtent(src.width(), src.transform().pixel_size,
                                target_pixel_size);
  const int h = ResampledExtent(src.height(), src.transform().pixel_size,
                                target_pixel_size);
  GeoTransform t = src.transform();
  t.pixel_size = target_pixel_size;
  Grid out(w, h, src.bands(), t);
  out.band_names() = src.band_names();

  std::vector<Stencil> xs(w), ys(h);
  // Dividing (rather than multiplying by a rounded ratio) lands centers that
  // coincide with source centers exactly, so their stencil weights are zero.
  auto position = [&](int i) {
    return (i + 0.5) * target_pixel_size / src_size - 0.5;
  };
  for (int c = 0; c < w; ++c) xs[c] = MakeStencil(position(c), src.width());
  for (int r = 0; r < h; ++r) ys[r] = MakeStencil(position(r), src.height());

  for (int r = 0; r < h; ++r) {
    const Stencil& sy = ys[r];
    for (int c = 0; c < w; ++c) {
      const Stencil& sx = xs[c];
      const bool use_x0 = sx.t != 1.0, use_x1 = sx.t != 0.0;
      const bool use_y0 = sy.t != 1.0, use_y1 = sy.t != 0.0;
      bool bad = false;
      if (use_y0 && use_x0) bad |= src.nodata(sy.i0, sx.i0);
      if (use_y0 && use_x1) bad |= src.nodata(sy.i0, sx.i1);
      if (use_y1 && use_x0) bad |= src.nodata(sy.i1, sx.i0);
      if (use_y1 && use_x1) bad |= src.nodata(sy.i1, sx.i1);
      out.set_nodata(r, c, bad);
      for (int b = 0; b < src.bands(); ++b) {
        // Difference form keeps constant fields exact.
        const double v00 = src.at(b, sy.i0, sx.i0), v01 = src.at(b, sy.i0, sx.i1);
        const double v10 = src.at(b, sy.i1, sx.i0), v11 = src.at(b, sy.i1, sx.i1);
        const double top = v00 + sx.t * (v01 - v00);
        const double bottom = v10 + sx.t * (v11 - v10);
        out.at(b, r, c) = static_cast<float>(top + sy.t * (bottom - top));
      }
    }
  }
  return out;
}

Grid NearestResample(const Grid& src, double target_pixel_size) {
  if (src.empty()) Fail(ErrorCode::kInvalidArgument, "empty input");
  Require(target_pixel_size > 0.0, "target pixel size must be positive");
  const double ratio = target_pixel_size / src.transform().pixel_size;
  const int w = ResampledExtent(src.width(), src.transform().pixel_size,
                                target_pixel_size);
  const int h = ResampledExtent(src.height(), src.transform().pixel_size,
                                target_pixel_size);
  GeoTransform t = src.transform();
  t.pixel_size = target_pixel_size;
  Grid out(w, h, src.bands(), t);
  out.band_names() = src.band_names();
  for (int r = 0; r < h; ++r) {
    const int sr = std::clamp(static_cast<int>(std::floor((r + 0.5) * ratio)), 0,
                              src.height() - 1);
    for (int c = 0; c < w; ++c) {
      const int sc = std::clamp(static_cast<int>(std::floor((c + 0.5) * ratio)),
                                0, src.width() - 1);
      out.set_nodata(r, c, src.nodata(sr, sc));
      for (int b = 0; b < src.bands(); ++b) out.at(b, r, c) = src.at(b, sr, sc);
    }
  }
  return out;
}

Grid UpsampleBands(std::span<const Grid> bands,
                   std::span<const double> band_native_sizes,
                   double target_pixel_size) {
  Require(!bands.empty(), "empty input");
  Require(bands.size() == band_native_sizes.size(),
          "one native size per band required");
  std::vector<Grid> resampled;
  resampled.reserve(bands.size());
  for (size_t i = 0; i < bands.size(); ++i) {
    const double native = band_native_sizes[i];
    const double multiple = native / target_pixel_size;
    if (native <= 0.0 || std::abs(multiple - std::round(multiple)) > 1e-9 ||
        std::round(multiple) < 1.0) {
      Fail(ErrorCode::kInvalidArgument, "band ", i, " native size ", native,
           " m is not an integer multiple of ", target_pixel_size, " m");
    }
    Require(bands[i].bands() == 1, "band ", i, " must be a single-band grid");
    Require(std::abs(bands[i].transform().pixel_size - native) < 1e-9,
            "band ", i, " grid pixel size does not match its native size");
    if (native == target_pixel_size) {
      resampled.push_back(bands[i]);
    } else {
      resampled.push_back(BilinearResample(bands[i], target_pixel_size));
    }
  }
  const Grid& ref = resampled.front();
  Grid out(ref.width(), ref.height(), static_cast<int>(resampled.size()),
           ref.transform());
  for (size_t i = 0; i < resampled.size(); ++i) {
    const Grid& g = resampled[i];
    if (g.width() != ref.width() || g.height() != ref.height()) {
      Fail(ErrorCode::kInvalidArgument, "band ", i,
           " does not cover the same extent as band 0");
    }
    std::copy(g.band(0).begin(), g.band(0).end(),
              out.band(static_cast<int>(i)).begin());
    out.band_names()[i] = g.band_names().front();
    for (size_t p = 0; p < g.pixel_count(); ++p) {
      out.nodata_mask()[p] |= g.nodata_mask()[p];
    }
  }
  return out;
}

}  // namespace hcs
