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

#ifndef HCSMAP_PIPELINE_COMMANDS_H_
#define HCSMAP_PIPELINE_COMMANDS_H_

#include <span>
#include <string>
#include <string_view>

#include <json.hpp>

#include "pipeline/config.h"

namespace hcs {

// Pipeline commands in execution order, followed by grad-check.
std::span<const std::string_view> CommandNames();
bool IsCommand(std::string_view name);

// Runs one command. Artifacts are written atomically below cfg.output_dir,
// each stage directory with a manifest.json listing the config hash, seed,
// thread count, version and SHA-256 of every input and output. Returns a
// JSON summary of the run. Throws Error on failure; grad-check reports its
// verdict in the summary ("passed") instead of throwing.
nlohmann::json RunCommand(const PipelineConfig& cfg, std::string_view command);

}  // namespace hcs

#endif  // HCSMAP_PIPELINE_COMMANDS_H_
