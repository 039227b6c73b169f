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

#ifndef HCSMAP_PIPELINE_CONFIG_H_
#define HCSMAP_PIPELINE_CONFIG_H_

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

#include <json.hpp>

#include "canopy/dataset.h"
#include "carbon/carbon.h"
#include "hcs/hcs.h"
#include "synth/world.h"

namespace hcs {

struct SynthSection {
  WorldConfig world;
  int acquisitions = 4;
  double reference_pixel_size = 30.0;  // carbon reference product, meters

  bool operator==(const SynthSection&) const = default;
};

struct CanopySection {
  TrainConfig train;
  int composite_images = 10;  // least-cloudy acquisitions used
  int tile = 128;
  int overlap = 8;

  bool operator==(const CanopySection&) const = default;
};

struct EvalSection {
  bool rank_zones_by_hcs = true;

  bool operator==(const EvalSection&) const = default;
};

// Every command reads and writes below output_dir; world_dir (default
// <output_dir>/world) may point at externally converted inputs instead.
struct PipelineConfig {
  std::string output_dir = "hcsmap_out";
  std::string world_dir;
  uint64_t seed = 1;
  int threads = 1;
  SynthSection synth;
  CanopySection canopy;
  CarbonConfig carbon;
  HcsThresholds thresholds;
  OverlayThresholds overlay;
  EvalSection eval;

  bool operator==(const PipelineConfig&) const = default;
};

// Throws Error(kConfig) on malformed JSON, unknown keys or invalid values.
PipelineConfig ParsePipelineConfig(std::string_view text);
PipelineConfig PipelineConfigFromJson(const nlohmann::json& j);
nlohmann::json ToJson(const PipelineConfig& cfg);
// Canonical text: ToJson(cfg).dump(2) plus a trailing newline.
std::string SerializePipelineConfig(const PipelineConfig& cfg);
void Validate(const PipelineConfig& cfg);

// Copies the global seed and thread count into the stage sections.
PipelineConfig Resolved(const PipelineConfig& cfg);

std::filesystem::path WorldDir(const PipelineConfig& cfg);

}  // namespace hcs

#endif  // HCSMAP_PIPELINE_CONFIG_H_
