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

#include "canopy/dataset.h"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <random>
#include <set>

#include "common/error.h"
#include "common/io_util.h"
#include "common/seed.h"
#include "grid/patch.h"

namespace hcs {
namespace {

constexpr char kMagic[] = "FPD1";

bool InTile(const TileInput& t, int col, int row) {
  return col >= 0 && row >= 0 && col < t.image.width() && row < t.image.height();
}

void AppendPatch(const TileInput& t, int col, int row, int size,
                 std::vector<float>& out) {
  const Patch p = ExtractPatch(t.image, col, row, size);
  for (double v : p.values.data()) out.push_back(static_cast<float>(v));
}

}  // namespace

nlohmann::json ToJson(const TrainConfig& c) {
  return {{"patch_size", c.patch_size},
          {"batch_size", c.batch_size},
          {"iterations", c.iterations},
          {"learning_rate", c.learning_rate},
          {"seed", c.seed},
          {"holdout_fraction", c.holdout_fraction},
          {"cloud_pixel_threshold", c.cloud_pixel_threshold},
          {"cloud_prob_threshold", c.cloud_prob_threshold},
          {"zero_cap_fraction", c.zero_cap_fraction},
          {"eval_every", c.eval_every},
          {"width", c.width},
          {"blocks", c.blocks},
          {"threads", c.threads}};
}

TrainConfig TrainConfigFromJson(const nlohmann::json& j) {
  TrainConfig c;
  auto get = [&](const char* key, auto& field) {
    if (j.contains(key)) field = j.at(key).get<std::decay_t<decltype(field)>>();
  };
  get("patch_size", c.patch_size);
  get("batch_size", c.batch_size);
  get("iterations", c.iterations);
  get("learning_rate", c.learning_rate);
  get("seed", c.seed);
  get("holdout_fraction", c.holdout_fraction);
  get("cloud_pixel_threshold", c.cloud_pixel_threshold);
  get("cloud_prob_threshold", c.cloud_prob_threshold);
  get("zero_cap_fraction", c.zero_cap_fraction);
  get("eval_every", c.eval_every);
  get("width", c.width);
  get("blocks", c.blocks);
  get("threads", c.threads);
  return c;
}

void Validate(const TrainConfig& c) {
  Require(c.patch_size > 0 && c.patch_size % 2 == 1, "patch_size must be odd");
  Require(c.batch_size > 0 && c.iterations >= 0 && c.eval_every > 0,
          "batch_size and eval_every must be positive");
  Require(c.learning_rate > 0.0, "learning_rate must be positive");
  for (double f : {c.holdout_fraction, c.cloud_pixel_threshold,
                   c.cloud_prob_threshold, c.zero_cap_fraction}) {
    Require(f >= 0.0 && f <= 1.0, "fractions must lie in [0, 1]");
  }
  Require(c.zero_cap_fraction < 1.0, "zero_cap_fraction must be below 1");
  Require(c.width > 0 && c.blocks >= 0, "invalid canopy architecture");
  Require(1 + 2 * (1 + 2 * c.blocks) <= c.patch_size,
          "receptive field exceeds patch_size");
}

Tensor Dataset::CenterCrop(size_t i, int size) const {
  Require(size <= patch_size && size % 2 == 1, "invalid crop size");
  const int off = (patch_size - size) / 2;
  const auto p = patch(i);
  Tensor t(size, size, bands);
  for (int r = 0; r < size; ++r) {
    for (int c = 0; c < size; ++c) {
      const float* src =
          p.data() + (static_cast<size_t>(r + off) * patch_size + c + off) * bands;
      double* dst = t.pixel(r, c);
      for (int b = 0; b < bands; ++b) dst[b] = src[b];
    }
  }
  return t;
}

size_t Dataset::CountSource(FootprintSource source) const {
  return std::count_if(records.begin(), records.end(),
                       [&](const FootprintSample& s) { return s.source == source; });
}

bool PatchIsCloudy(const Grid& cloud_prob, int center_col, int center_row,
                   const TrainConfig& cfg) {
  const int size = cfg.patch_size, half = size / 2;
  int cloudy = 0;
  for (int r = 0; r < size; ++r) {
    const int sr = ReflectIndex(center_row - half + r, cloud_prob.height());
    for (int c = 0; c < size; ++c) {
      const int sc = ReflectIndex(center_col - half + c, cloud_prob.width());
      if (cloud_prob.nodata(sr, sc) ||
          cloud_prob.at(0, sr, sc) > cfg.cloud_prob_threshold) {
        ++cloudy;
      }
    }
  }
  return static_cast<double>(cloudy) / (size * size) > cfg.cloud_pixel_threshold;
}

Dataset BuildDataset(std::span<const TileInput> tiles,
                     std::span<const FootprintSample> footprints,
                     const TrainConfig& cfg) {
  Validate(cfg);
  Require(!tiles.empty(), "no tiles given");
  const int bands = tiles.front().image.bands();
  std::multimap<int, size_t> by_id;
  for (size_t i = 0; i < tiles.size(); ++i) {
    const TileInput& t = tiles[i];
    Require(t.image.bands() == bands, "tiles disagree on band count");
    RequireAligned(t.image, t.cloud_prob, "cloud probability");
    RequireAligned(t.image, t.scene_class, "scene class");
    by_id.emplace(t.tile_id, i);
  }

  Dataset ds;
  ds.patch_size = cfg.patch_size;
  ds.bands = bands;
  ds.config = ToJson(cfg);
  for (const auto& [id, _] : by_id) {
    if (ds.tiles.empty() || ds.tiles.back() != id) ds.tiles.push_back(id);
  }

  struct Candidate {
    size_t tile;
    int col, row;
    float height;
  };
  std::vector<Candidate> lidar, zero_footprints;
  for (const FootprintSample& f : footprints) {
    auto [lo, hi] = by_id.equal_range(f.tile_id);
    if (lo == hi) {
      ++ds.skipped_outside;
      continue;
    }
    for (auto it = lo; it != hi; ++it) {
      const TileInput& t = tiles[it->second];
      if (!InTile(t, f.center_col, f.center_row)) {
        ++ds.skipped_outside;
        continue;
      }
      if (PatchIsCloudy(t.cloud_prob, f.center_col, f.center_row, cfg)) {
        ++ds.dropped_cloudy;
        continue;
      }
      const int code = static_cast<int>(t.scene_class.at(0, f.center_row, f.center_col));
      if (f.source == FootprintSource::kForcedZero || scene::IsNonVegetated(code)) {
        zero_footprints.push_back({it->second, f.center_col, f.center_row, 0.0f});
      } else {
        lidar.push_back({it->second, f.center_col, f.center_row,
                         std::max(0.0f, f.canopy_top_height)});
      }
    }
  }

  // Forced zeros: footprint-derived ones first, then non-vegetated pixels.
  const size_t cap = static_cast<size_t>(std::floor(
      cfg.zero_cap_fraction / (1.0 - cfg.zero_cap_fraction) * lidar.size() + 1e-9));
  std::mt19937_64 rng(DeriveSeed(cfg.seed, 101));
  std::vector<Candidate> zeros;
  if (zero_footprints.size() > cap) {
    std::shuffle(zero_footprints.begin(), zero_footprints.end(), rng);
    zero_footprints.resize(cap);
  }
  zeros = zero_footprints;
  if (zeros.size() < cap) {
    std::set<std::tuple<size_t, int, int>> taken;
    for (const auto& z : zeros) taken.emplace(z.tile, z.col, z.row);
    std::vector<Candidate> pool;
    for (size_t i = 0; i < tiles.size(); ++i) {
      const Grid& scl = tiles[i].scene_class;
      for (int r = 0; r < scl.height(); ++r) {
        for (int c = 0; c < scl.width(); ++c) {
          if (!scl.nodata(r, c) && scene::IsNonVegetated(static_cast<int>(scl.at(0, r, c))) &&
              !taken.count({i, c, r})) {
            pool.push_back({i, c, r, 0.0f});
          }
        }
      }
    }
    std::shuffle(pool.begin(), pool.end(), rng);
    for (const Candidate& z : pool) {
      if (zeros.size() >= cap) break;
      if (PatchIsCloudy(tiles[z.tile].cloud_prob, z.col, z.row, cfg)) continue;
      zeros.push_back(z);
    }
  }

  auto emit = [&](const Candidate& c, FootprintSource source) {
    FootprintSample s;
    s.tile_id = tiles[c.tile].tile_id;
    s.center_col = c.col;
    s.center_row = c.row;
    s.canopy_top_height = c.height;
    s.source = source;
    ds.records.push_back(s);
    AppendPatch(tiles[c.tile], c.col, c.row, cfg.patch_size, ds.patches);
  };
  ds.patches.reserve((lidar.size() + zeros.size()) * ds.patch_stride());
  for (const auto& c : lidar) emit(c, FootprintSource::kLidarFootprint);
  for (const auto& c : zeros) emit(c, FootprintSource::kForcedZero);
  return ds;
}

Dataset FootprintDataset(std::span<const FootprintSample> footprints) {
  Dataset ds;
  ds.records.assign(footprints.begin(), footprints.end());
  std::set<int> ids;
  for (const auto& f : footprints) ids.insert(f.tile_id);
  ds.tiles.assign(ids.begin(), ids.end());
  ds.config = nlohmann::json::object();
  return ds;
}

std::string EncodeFpd1(const Dataset& ds) {
  Require(ds.patches.size() == ds.records.size() * ds.patch_stride(),
          "patch payload does not match record count");
  nlohmann::json tile_id = nlohmann::json::array(), col = nlohmann::json::array(),
                 row = nlohmann::json::array(), height = nlohmann::json::array(),
                 source = nlohmann::json::array(), offset = nlohmann::json::array();
  for (size_t i = 0; i < ds.records.size(); ++i) {
    const auto& r = ds.records[i];
    tile_id.push_back(r.tile_id);
    col.push_back(r.center_col);
    row.push_back(r.center_row);
    height.push_back(r.canopy_top_height);
    source.push_back(r.source == FootprintSource::kLidarFootprint ? "lidar_footprint"
                                                                 : "forced_zero");
    offset.push_back(i * ds.patch_stride() * sizeof(float));
  }
  nlohmann::json header = {
      {"format", kMagic},
      {"patch_size", ds.patch_size},
      {"bands", ds.bands},
      {"dtype", "float32"},
      {"byte_order", "little"},
      {"layout", "record,row,col,band"},
      {"count", ds.records.size()},
      {"tiles", ds.tiles},
      {"config", ds.config},
      {"skipped_outside", ds.skipped_outside},
      {"dropped_cloudy", ds.dropped_cloudy},
      {"records",
       {{"tile_id", tile_id},
        {"center_col", col},
        {"center_row", row},
        {"canopy_top_height", height},
        {"source", source},
        {"offset", offset}}}};
  const std::string text = header.dump();
  std::string out(kMagic, 4);
  AppendU32(out, static_cast<uint32_t>(text.size()));
  out += text;
  AppendF32(out, ds.patches);
  return out;
}

Dataset DecodeFpd1(std::string_view bytes) {
  if (bytes.size() < 8 || bytes.substr(0, 4) != kMagic) {
    Fail(ErrorCode::kIo, "not an FPD1 file");
  }
  const uint32_t len = ReadU32(bytes, 4);
  if (bytes.size() < 8ull + len) Fail(ErrorCode::kIo, "truncated FPD1 header");
  nlohmann::json h;
  try {
    h = nlohmann::json::parse(bytes.substr(8, len));
  } catch (const nlohmann::json::exception& e) {
    Fail(ErrorCode::kIo, "bad FPD1 header: ", e.what());
  }
  Dataset ds;
  try {
    ds.patch_size = h.at("patch_size").get<int>();
    ds.bands = h.at("bands").get<int>();
    ds.tiles = h.at("tiles").get<std::vector<int>>();
    ds.config = h.at("config");
    ds.skipped_outside = h.value("skipped_outside", int64_t{0});
    ds.dropped_cloudy = h.value("dropped_cloudy", int64_t{0});
    const auto& rec = h.at("records");
    const size_t n = h.at("count").get<size_t>();
    for (size_t i = 0; i < n; ++i) {
      FootprintSample s;
      s.tile_id = rec.at("tile_id").at(i).get<int>();
      s.center_col = rec.at("center_col").at(i).get<int>();
      s.center_row = rec.at("center_row").at(i).get<int>();
      s.canopy_top_height = rec.at("canopy_top_height").at(i).get<float>();
      const std::string src = rec.at("source").at(i).get<std::string>();
      if (src == "lidar_footprint") {
        s.source = FootprintSource::kLidarFootprint;
      } else if (src == "forced_zero") {
        s.source = FootprintSource::kForcedZero;
      } else {
        Fail(ErrorCode::kIo, "unknown footprint source '", src, "'");
      }
      ds.records.push_back(s);
    }
  } catch (const nlohmann::json::exception& e) {
    Fail(ErrorCode::kIo, "bad FPD1 index: ", e.what());
  }
  const size_t floats = ds.records.size() * ds.patch_stride();
  const size_t begin = 8ull + len;
  if (bytes.size() != begin + floats * sizeof(float)) {
    Fail(ErrorCode::kIo, "FPD1 payload size mismatch");
  }
  ds.patches.resize(floats);
  std::memcpy(ds.patches.data(), bytes.data() + begin, floats * sizeof(float));
  return ds;
}

void WriteFpd1(const std::filesystem::path& path, const Dataset& ds) {
  WriteFileAtomic(path, EncodeFpd1(ds));
}

Dataset ReadFpd1(const std::filesystem::path& path) {
  return DecodeFpd1(ReadFileBytes(path));
}

TileSplit SplitTiles(std::span<const int> tile_ids, double holdout_fraction,
                     uint64_t seed) {
  if (!(holdout_fraction > 0.0 && holdout_fraction < 1.0)) {
    Fail(ErrorCode::kInvalidArgument, "holdout fraction must lie in (0, 1)");
  }
  std::vector<int> ids(tile_ids.begin(), tile_ids.end());
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  const int n = static_cast<int>(ids.size());
  Require(n >= 2, "at least two tiles required for a split");
  // Rounded up so that 10% of 914 tiles gives 92; the tolerance keeps exact
  // products such as 0.1 * 10 from rounding up to the next integer.
  const int n_val = std::clamp(static_cast<int>(std::ceil(holdout_fraction * n - 1e-9)), 1, n - 1);
  std::mt19937_64 rng(seed);
  std::shuffle(ids.begin(), ids.end(), rng);
  TileSplit split;
  split.val.assign(ids.begin(), ids.begin() + n_val);
  split.train.assign(ids.begin() + n_val, ids.end());
  std::sort(split.val.begin(), split.val.end());
  std::sort(split.train.begin(), split.train.end());
  return split;
}

}  // namespace hcs
