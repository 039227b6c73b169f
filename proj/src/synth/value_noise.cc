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

#include "synth/value_noise.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "common/error.h"

namespace hcs {
namespace {

double Quintic(double t) { return t * t * t * (t * (t * 6.0 - 15.0) + 10.0); }

}  // namespace

std::vector<double> ValueNoise(int width, int height, double correlation_length,
                               uint64_t seed) {
  Require(width > 0 && height > 0, "empty noise field");
  Require(correlation_length > 0.0, "correlation length must be positive");
  const double spacing = correlation_length / kValueNoiseEFoldingLag;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double off_x = unit(rng) * spacing;
  const double off_y = unit(rng) * spacing;
  const int nx = static_cast<int>(std::ceil((width + off_x) / spacing)) + 2;
  const int ny = static_cast<int>(std::ceil((height + off_y) / spacing)) + 2;
  std::vector<double> lattice(static_cast<size_t>(nx) * ny);
  for (double& v : lattice) v = unit(rng);

  std::vector<double> field(static_cast<size_t>(width) * height);
  for (int r = 0; r < height; ++r) {
    const double fy = (r + 0.5 + off_y) / spacing;
    const int iy = static_cast<int>(std::floor(fy));
    const double ty = Quintic(fy - iy);
    for (int c = 0; c < width; ++c) {
      const double fx = (c + 0.5 + off_x) / spacing;
      const int ix = static_cast<int>(std::floor(fx));
      const double tx = Quintic(fx - ix);
      const double v00 = lattice[static_cast<size_t>(iy) * nx + ix];
      const double v01 = lattice[static_cast<size_t>(iy) * nx + ix + 1];
      const double v10 = lattice[static_cast<size_t>(iy + 1) * nx + ix];
      const double v11 = lattice[static_cast<size_t>(iy + 1) * nx + ix + 1];
      const double top = v00 + tx * (v01 - v00);
      const double bottom = v10 + tx * (v11 - v10);
      field[static_cast<size_t>(r) * width + c] = top + ty * (bottom - top);
    }
  }
  return field;
}

std::vector<double> RankUniform(const std::vector<double>& field) {
  std::vector<size_t> order(field.size());
  std::iota(order.begin(), order.end(), size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](size_t a, size_t b) { return field[a] < field[b]; });
  std::vector<double> out(field.size(), 0.0);
  if (field.size() < 2) return out;
  const double denom = static_cast<double>(field.size() - 1);
  for (size_t rank = 0; rank < order.size(); ++rank) {
    out[order[rank]] = static_cast<double>(rank) / denom;
  }
  return out;
}

}  // namespace hcs
