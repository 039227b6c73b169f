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

#include "pipeline/config.h"

#include <set>

#include "common/error.h"
#include "common/seed.h"

namespace hcs {
namespace {

void RejectUnknown(const nlohmann::json& j, const nlohmann::json& known, const char* section) {
  if (!j.is_object()) Fail(ErrorCode::kConfig, "section '", section, "' must be an object");
  for (const auto& [key, _] : j.items()) {
    if (!known.contains(key)) {
      Fail(ErrorCode::kConfig, "unknown key '", key, "' in section '", section, "'");
    }
  }
}

}  // namespace

nlohmann::json ToJson(const PipelineConfig& c) {
  nlohmann::json synth = ToJson(c.synth.world);
  synth["acquisitions"] = c.synth.acquisitions;
  synth["reference_pixel_size"] = c.synth.reference_pixel_size;
  nlohmann::json canopy = ToJson(c.canopy.train);
  canopy["composite_images"] = c.canopy.composite_images;
  canopy["tile"] = c.canopy.tile;
  canopy["overlap"] = c.canopy.overlap;
  return {{"output_dir", c.output_dir},
          {"world_dir", c.world_dir},
          {"seed", c.seed},
          {"threads", c.threads},
          {"synth", synth},
          {"canopy", canopy},
          {"carbon", ToJson(c.carbon)},
          {"hcs", {{"thresholds", ToJson(c.thresholds)}, {"overlay", ToJson(c.overlay)}}},
          {"eval", {{"rank_zones_by_hcs", c.eval.rank_zones_by_hcs}}}};
}

PipelineConfig PipelineConfigFromJson(const nlohmann::json& j) {
  const PipelineConfig defaults;
  const nlohmann::json known = ToJson(defaults);
  PipelineConfig c;
  try {
    RejectUnknown(j, known, "root");
    if (j.contains("output_dir")) c.output_dir = j.at("output_dir").get<std::string>();
    if (j.contains("world_dir")) c.world_dir = j.at("world_dir").get<std::string>();
    if (j.contains("seed")) c.seed = j.at("seed").get<uint64_t>();
    if (j.contains("threads")) c.threads = j.at("threads").get<int>();
    if (j.contains("synth")) {
      const auto& s = j.at("synth");
      RejectUnknown(s, known.at("synth"), "synth");
      c.synth.world = WorldConfigFromJson(s);
      if (s.contains("acquisitions")) c.synth.acquisitions = s.at("acquisitions").get<int>();
      if (s.contains("reference_pixel_size")) {
        c.synth.reference_pixel_size = s.at("reference_pixel_size").get<double>();
      }
    }
    if (j.contains("canopy")) {
      const auto& s = j.at("canopy");
      RejectUnknown(s, known.at("canopy"), "canopy");
      c.canopy.train = TrainConfigFromJson(s);
      if (s.contains("composite_images")) c.canopy.composite_images = s.at("composite_images").get<int>();
      if (s.contains("tile")) c.canopy.tile = s.at("tile").get<int>();
      if (s.contains("overlap")) c.canopy.overlap = s.at("overlap").get<int>();
    }
    if (j.contains("carbon")) {
      RejectUnknown(j.at("carbon"), known.at("carbon"), "carbon");
      c.carbon = CarbonConfigFromJson(j.at("carbon"));
    }
    if (j.contains("hcs")) {
      const auto& s = j.at("hcs");
      RejectUnknown(s, known.at("hcs"), "hcs");
      if (s.contains("thresholds")) {
        RejectUnknown(s.at("thresholds"), known.at("hcs").at("thresholds"), "hcs.thresholds");
        c.thresholds = HcsThresholdsFromJson(s.at("thresholds"));
      }
      if (s.contains("overlay")) {
        RejectUnknown(s.at("overlay"), known.at("hcs").at("overlay"), "hcs.overlay");
        c.overlay = OverlayThresholdsFromJson(s.at("overlay"));
      }
    }
    if (j.contains("eval")) {
      RejectUnknown(j.at("eval"), known.at("eval"), "eval");
      c.eval.rank_zones_by_hcs = j.at("eval").value("rank_zones_by_hcs", true);
    }
  } catch (const nlohmann::json::exception& e) {
    Fail(ErrorCode::kConfig, "invalid config: ", e.what());
  }
  Validate(c);
  return c;
}

PipelineConfig ParsePipelineConfig(std::string_view text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    Fail(ErrorCode::kConfig, "config parse error: ", e.what());
  }
  return PipelineConfigFromJson(j);
}

std::string SerializePipelineConfig(const PipelineConfig& cfg) {
  return ToJson(cfg).dump(2) + "\n";
}

void Validate(const PipelineConfig& c) {
  try {
    if (c.output_dir.empty()) Fail(ErrorCode::kConfig, "output_dir must not be empty");
    if (c.threads < 1) Fail(ErrorCode::kConfig, "threads must be at least 1");
    if (c.synth.acquisitions < 1) Fail(ErrorCode::kConfig, "acquisitions must be at least 1");
    if (!(c.synth.reference_pixel_size > 0.0)) {
      Fail(ErrorCode::kConfig, "reference_pixel_size must be positive");
    }
    if (c.canopy.composite_images < 1) Fail(ErrorCode::kConfig, "composite_images must be at least 1");
    Validate(c.synth.world);
    Validate(c.canopy.train);
    Validate(c.carbon);
    Validate(c.thresholds);
    Validate(c.overlay);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kConfig) throw;
    Fail(ErrorCode::kConfig, "invalid config: ", e.what());
  }
}

PipelineConfig Resolved(const PipelineConfig& cfg) {
  PipelineConfig c = cfg;
  c.synth.world.seed = cfg.seed;
  c.canopy.train.seed = cfg.seed;
  c.canopy.train.threads = cfg.threads;
  c.carbon.threads = cfg.threads;
  for (auto& s : c.carbon.seeds) s = DeriveSeed(cfg.seed, s);
  return c;
}

std::filesystem::path WorldDir(const PipelineConfig& cfg) {
  if (!cfg.world_dir.empty()) return cfg.world_dir;
  return std::filesystem::path(cfg.output_dir) / "world";
}

}  // namespace hcs
