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

#include "nn/checkpoint.h"

#include <cstring>
#include <vector>

#include "common/error.h"
#include "common/io_util.h"

namespace hcs {
namespace {

constexpr char kMagic[4] = {'N', 'N', 'P', '1'};

const char* KindName(LayerKind k) {
  switch (k) {
    case LayerKind::kConv: return "conv";
    case LayerKind::kResidual: return "residual";
    case LayerKind::kPowerLaw: return "power_law";
  }
  return "?";
}

LayerKind KindFromName(const std::string& s) {
  if (s == "conv") return LayerKind::kConv;
  if (s == "residual") return LayerKind::kResidual;
  if (s == "power_law") return LayerKind::kPowerLaw;
  Fail(ErrorCode::kIo, "unknown layer kind '", s, "'");
}

nlohmann::json NormToJson(const Normalization& n) {
  return {{"shift", n.shift}, {"scale", n.scale}};
}

Normalization NormFromJson(const nlohmann::json& j) {
  Normalization n;
  n.shift = j.at("shift").get<std::vector<double>>();
  n.scale = j.at("scale").get<std::vector<double>>();
  return n;
}

}  // namespace

nlohmann::json ModelSpecToJson(const ModelSpec& spec) {
  nlohmann::json layers = nlohmann::json::array();
  for (const auto& l : spec.layers) {
    layers.push_back({{"kind", KindName(l.kind)},
                      {"kernel", l.kernel},
                      {"out_channels", l.out_channels},
                      {"activation", l.activation == Activation::kRelu ? "relu" : "identity"}});
  }
  return {{"input_channels", spec.input_channels}, {"layers", layers}};
}

ModelSpec ModelSpecFromJson(const nlohmann::json& j) {
  ModelSpec spec;
  spec.input_channels = j.at("input_channels").get<int>();
  for (const auto& l : j.at("layers")) {
    LayerSpec layer;
    layer.kind = KindFromName(l.at("kind").get<std::string>());
    layer.kernel = l.at("kernel").get<int>();
    layer.out_channels = l.at("out_channels").get<int>();
    const auto act = l.at("activation").get<std::string>();
    if (act != "relu" && act != "identity") {
      Fail(ErrorCode::kIo, "unknown activation '", act, "'");
    }
    layer.activation = act == "relu" ? Activation::kRelu : Activation::kIdentity;
    spec.layers.push_back(layer);
  }
  return spec;
}

std::string EncodeNnp1(const Checkpoint& checkpoint) {
  const Model& model = checkpoint.model;
  nlohmann::json heads = {"mean"};
  if (model.spec().HasVarianceHead()) heads.push_back("log_variance");
  nlohmann::json header = {
      {"format", "NNP1"},
      {"spec", ModelSpecToJson(model.spec())},
      {"param_count", model.param_count()},
      {"receptive_field", model.spec().ReceptiveField()},
      {"output_heads", heads},
      {"input_norm", NormToJson(model.input_norm)},
      {"target_norm", NormToJson(model.target_norm)},
      {"optimizer", {{"name", "adam"}, {"moments_stored", false},
                     {"step_count", checkpoint.optimizer_steps}}},
      {"dtype", "float32"},
      {"byte_order", "little"},
  };
  if (!checkpoint.metadata.is_null()) header["metadata"] = checkpoint.metadata;
  const std::string text = header.dump();
  std::string out(kMagic, 4);
  AppendU32(out, static_cast<uint32_t>(text.size()));
  out += text;
  std::vector<float> params(model.params().begin(), model.params().end());
  AppendF32(out, params);
  return out;
}

Checkpoint DecodeNnp1(std::string_view bytes) {
  if (bytes.size() < 8 || std::memcmp(bytes.data(), kMagic, 4) != 0) {
    Fail(ErrorCode::kIo, "not an NNP1 checkpoint");
  }
  const uint32_t len = ReadU32(bytes, 4);
  if (bytes.size() < 8 + static_cast<size_t>(len)) {
    Fail(ErrorCode::kIo, "NNP1 header truncated");
  }
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(bytes.substr(8, len));
  } catch (const nlohmann::json::exception& e) {
    Fail(ErrorCode::kIo, "NNP1 header: ", e.what());
  }
  Checkpoint cp;
  cp.model = Model(ModelSpecFromJson(header.at("spec")));
  const size_t count = header.at("param_count").get<size_t>();
  if (count != cp.model.param_count()) {
    Fail(ErrorCode::kIo, "NNP1 parameter count does not match layer specs");
  }
  if (bytes.size() != 8 + len + count * sizeof(float)) {
    Fail(ErrorCode::kIo, "NNP1 payload size mismatch");
  }
  std::vector<float> params(count);
  std::memcpy(params.data(), bytes.data() + 8 + len, count * sizeof(float));
  std::copy(params.begin(), params.end(), cp.model.params().begin());
  cp.model.input_norm = NormFromJson(header.at("input_norm"));
  cp.model.target_norm = NormFromJson(header.at("target_norm"));
  cp.optimizer_steps = header.at("optimizer").at("step_count").get<int64_t>();
  if (header.contains("metadata")) cp.metadata = header["metadata"];
  return cp;
}

void WriteNnp1(const std::filesystem::path& path, const Checkpoint& checkpoint) {
  WriteFileAtomic(path, EncodeNnp1(checkpoint));
}

Checkpoint ReadNnp1(const std::filesystem::path& path) {
  return DecodeNnp1(ReadFileBytes(path));
}

}  // namespace hcs
