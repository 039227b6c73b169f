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

#ifndef HCSMAP_GRID_GRD_IO_H_
#define HCSMAP_GRID_GRD_IO_H_

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "grid/grid.h"

namespace hcs {

// GRD1 layout:
//   "GRD1" | u32 header_length | JSON header | float32 payload | mask bits
// The payload is band-major little-endian float32; the mask is one bit per
// pixel, LSB-first, set for nodata. `attributes` carries optional metadata
// (for example a class legend) and is stored under the header key of the
// same name.
std::string EncodeGrd1(const Grid& grid,
                       const nlohmann::json& attributes = nullptr);
Grid DecodeGrd1(std::string_view bytes, nlohmann::json* attributes = nullptr);

void WriteGrd1(const std::filesystem::path& path, const Grid& grid,
               const nlohmann::json& attributes = nullptr);
Grid ReadGrd1(const std::filesystem::path& path,
              nlohmann::json* attributes = nullptr);

// Binary PGM of one band, min-max scaled over valid pixels to 1..255;
// nodata pixels are written as 0.
void WritePgm(const std::filesystem::path& path, const Grid& grid,
              int band = 0);

// Binary PPM mapping integer codes in band 0 through `palette`; codes outside
// the palette and nodata pixels are black.
void WritePpm(const std::filesystem::path& path, const Grid& grid,
              std::span<const std::array<uint8_t, 3>> palette);

// "col,row,x,y,<band names...>" with map coordinates of pixel centers.
// Nodata samples have empty value fields.
std::string SamplesCsv(const Grid& grid,
                       std::span<const std::pair<int, int>> col_row);

}  // namespace hcs

#endif  // HCSMAP_GRID_GRD_IO_H_
