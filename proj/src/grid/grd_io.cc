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

#include "grid/grd_io.h"

#include <algorithm>
#include <cstring>
#include <limits>
#include <sstream>

#include "common/error.h"
#include "common/io_util.h"

namespace hcs {

namespace {
constexpr char kMagic[4] = {'G', 'R', 'D', '1'};
}  // namespace

std::string EncodeGrd1(const Grid& grid, const nlohmann::json& attributes) {
  nlohmann::json header = {
      {"format", "GRD1"},
      {"width", grid.width()},
      {"height", grid.height()},
      {"bands", grid.bands()},
      {"pixel_size", grid.transform().pixel_size},
      {"origin_x", grid.transform().origin_x},
      {"origin_y", grid.transform().origin_y},
      {"band_names", grid.band_names()},
      {"dtype", "float32"},
      {"byte_order", "little"},
      {"nodata", "mask"},
  };
  if (!attributes.is_null()) header["attributes"] = attributes;
  const std::string text = header.dump();
  std::string out(kMagic, 4);
  AppendU32(out, static_cast<uint32_t>(text.size()));
  out += text;
  AppendF32(out, grid.values());
  out += PackBits(grid.nodata_mask());
  return out;
}

Grid DecodeGrd1(std::string_view bytes, nlohmann::json* attributes) {
  if (bytes.size() < 8 || std::memcmp(bytes.data(), kMagic, 4) != 0) {
    Fail(ErrorCode::kIo, "not a GRD1 file");
  }
  const uint32_t header_len = ReadU32(bytes, 4);
  if (bytes.size() < 8 + static_cast<size_t>(header_len)) {
    Fail(ErrorCode::kIo, "GRD1 header truncated");
  }
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(bytes.substr(8, header_len));
  } catch (const nlohmann::json::exception& e) {
    Fail(ErrorCode::kIo, "GRD1 header: ", e.what());
  }
  GeoTransform t;
  t.pixel_size = header.at("pixel_size").get<double>();
  t.origin_x = header.at("origin_x").get<double>();
  t.origin_y = header.at("origin_y").get<double>();
  Grid grid(header.at("width").get<int>(), header.at("height").get<int>(),
            header.at("bands").get<int>(), t);
  grid.band_names() = header.at("band_names").get<std::vector<std::string>>();
  if (static_cast<int>(grid.band_names().size()) != grid.bands()) {
    Fail(ErrorCode::kIo, "GRD1 band_names length mismatch");
  }
  const size_t payload = grid.values().size() * sizeof(float);
  const size_t offset = 8 + header_len;
  const size_t mask_bytes = (grid.pixel_count() + 7) / 8;
  if (bytes.size() != offset + payload + mask_bytes) {
    Fail(ErrorCode::kIo, "GRD1 payload size mismatch");
  }
  std::memcpy(grid.values().data(), bytes.data() + offset, payload);
  grid.nodata_mask() =
      UnpackBits(bytes.substr(offset + payload), grid.pixel_count());
  if (attributes) {
    *attributes = header.contains("attributes") ? header["attributes"]
                                                : nlohmann::json();
  }
  return grid;
}

void WriteGrd1(const std::filesystem::path& path, const Grid& grid,
               const nlohmann::json& attributes) {
  WriteFileAtomic(path, EncodeGrd1(grid, attributes));
}

Grid ReadGrd1(const std::filesystem::path& path, nlohmann::json* attributes) {
  return DecodeGrd1(ReadFileBytes(path), attributes);
}

void WritePgm(const std::filesystem::path& path, const Grid& grid, int band) {
  Require(band >= 0 && band < grid.bands(), "band index out of range");
  float lo = std::numeric_limits<float>::max();
  float hi = std::numeric_limits<float>::lowest();
  const auto values = grid.band(band);
  for (size_t i = 0; i < values.size(); ++i) {
    if (grid.nodata_mask()[i]) continue;
    lo = std::min(lo, values[i]);
    hi = std::max(hi, values[i]);
  }
  std::string out = "P5\n" + std::to_string(grid.width()) + " " +
                    std::to_string(grid.height()) + "\n255\n";
  const double span = hi > lo ? static_cast<double>(hi) - lo : 1.0;
  for (size_t i = 0; i < values.size(); ++i) {
    if (grid.nodata_mask()[i]) {
      out.push_back(0);
      continue;
    }
    const double s = (values[i] - lo) / span;
    out.push_back(static_cast<char>(1 + static_cast<int>(s * 254.0 + 0.5)));
  }
  WriteFileAtomic(path, out);
}

void WritePpm(const std::filesystem::path& path, const Grid& grid,
              std::span<const std::array<uint8_t, 3>> palette) {
  std::string out = "P6\n" + std::to_string(grid.width()) + " " +
                    std::to_string(grid.height()) + "\n255\n";
  const auto values = grid.band(0);
  for (size_t i = 0; i < values.size(); ++i) {
    const long code = std::lround(values[i]);
    std::array<uint8_t, 3> rgb = {0, 0, 0};
    if (!grid.nodata_mask()[i] && code >= 0 &&
        code < static_cast<long>(palette.size())) {
      rgb = palette[code];
    }
    out.append(reinterpret_cast<const char*>(rgb.data()), 3);
  }
  WriteFileAtomic(path, out);
}

std::string SamplesCsv(const Grid& grid,
                       std::span<const std::pair<int, int>> col_row) {
  std::ostringstream os;
  os.precision(9);
  os << "col,row,x,y";
  for (const auto& name : grid.band_names()) os << ',' << name;
  os << '\n';
  for (const auto& [c, r] : col_row) {
    Require(c >= 0 && r >= 0 && c < grid.width() && r < grid.height(),
            "sample (", c, ", ", r, ") outside grid");
    auto [x, y] = grid.transform().PixelCenter(c, r);
    os << c << ',' << r << ',' << x << ',' << y;
    for (int b = 0; b < grid.bands(); ++b) {
      os << ',';
      if (!grid.nodata(r, c)) os << grid.at(b, r, c);
    }
    os << '\n';
  }
  return os.str();
}

}  // namespace hcs
