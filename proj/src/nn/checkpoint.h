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

#ifndef HCSMAP_NN_CHECKPOINT_H_
#define HCSMAP_NN_CHECKPOINT_H_

#include <filesystem>
#include <string>
#include <string_view>

#include <json.hpp>

#include "nn/model.h"

namespace hcs {

// NNP1 layout: "NNP1" | u32 header_length | JSON header | float32 params.
// The header records the layer list, parameter count, receptive field, head
// names, normalisation constants, optimizer flags and free-form metadata.
struct Checkpoint {
  Model model;
  int64_t optimizer_steps = 0;
  nlohmann::json metadata;  // null or object
};

std::string EncodeNnp1(const Checkpoint& checkpoint);
Checkpoint DecodeNnp1(std::string_view bytes);

void WriteNnp1(const std::filesystem::path& path, const Checkpoint& checkpoint);
Checkpoint ReadNnp1(const std::filesystem::path& path);

nlohmann::json ModelSpecToJson(const ModelSpec& spec);
ModelSpec ModelSpecFromJson(const nlohmann::json& j);

}  // namespace hcs

#endif  // HCSMAP_NN_CHECKPOINT_H_
