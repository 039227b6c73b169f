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

#include "nn/dense.h"

#include "common/error.h"
#include "common/parallel.h"
#include "grid/patch.h"
#include "grid/tiles.h"

namespace hcs {

Grid DenseInference(const Model& model, const Grid& input,
                    const DenseOptions& options) {
  Require(!input.empty(), "empty input");
  if (input.bands() != model.spec().input_channels) {
    Fail(ErrorCode::kInvalidArgument, "band mismatch: model expects ",
         model.spec().input_channels, " bands, image has ", input.bands());
  }
  const int halo = (model.spec().ReceptiveField() - 1) / 2;
  Require(options.overlap >= halo,
          "tile overlap smaller than half the receptive field");
  const auto windows = IterateTiles(input.width(), input.height(), options.tile,
                                    options.overlap);
  Grid out(input.width(), input.height(), model.spec().OutputChannels(),
           input.transform());
  out.nodata_mask() = input.nodata_mask();
  ParallelFor(windows.size(), options.threads, [&](size_t i) {
    const TileWindow& w = windows[i];
    Tensor x = ExtractWindow(input, w.col0 - halo, w.row0 - halo,
                             w.width + 2 * halo, w.height + 2 * halo);
    model.NormalizeInput(x);
    const Tensor y = model.Forward(x, Padding::kValid);
    for (int r = 0; r < w.core_height; ++r) {
      for (int c = 0; c < w.core_width; ++c) {
        const int gr = w.core_row0 + r, gc = w.core_col0 + c;
        const double* px = y.pixel(gr - w.row0, gc - w.col0);
        for (int k = 0; k < out.bands(); ++k) {
          out.at(k, gr, gc) = static_cast<float>(px[k]);
        }
      }
    }
  });
  return out;
}

}  // namespace hcs
