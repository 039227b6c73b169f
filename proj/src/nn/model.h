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

#ifndef HCSMAP_NN_MODEL_H_
#define HCSMAP_NN_MODEL_H_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "nn/conv.h"
#include "nn/tensor.h"

namespace hcs {

enum class LayerKind {
  kConv,      // single convolution
  kResidual,  // x + conv(relu(conv(x))), both 3x3, width preserved
  kPowerLaw,  // a * max(x, eps)^b elementwise, a and b trainable
};

struct LayerSpec {
  LayerKind kind = LayerKind::kConv;
  int kernel = 3;
  int out_channels = 0;
  Activation activation = Activation::kRelu;
};

// Ordered layer list. The last layer's output channels are the heads:
// channel 0 is the mean, channel 1 (if present) the log-variance.
struct ModelSpec {
  int input_channels = 1;
  std::vector<LayerSpec> layers;

  int ReceptiveField() const;
  int OutputChannels() const;
  int ThreeByThreeLayers() const;
  bool HasVarianceHead() const { return OutputChannels() == 2; }
};

// Stage-1 canopy regressor: 3x3 stem, `blocks` residual blocks, 1x1 head.
ModelSpec CanopyModelSpec(int input_channels, int width, int blocks);

// Stage-2 carbon regressor: `conv_layers` 3x3 relu convolutions and a 1x1
// head with mean and log-variance channels, optionally led by a power-law.
ModelSpec CarbonModelSpec(int width, int conv_layers, bool power_law);

constexpr double kPowerLawEpsilon = 1e-6;

// Fixed per-channel affine (x - shift) / scale.
struct Normalization {
  std::vector<double> shift;
  std::vector<double> scale;

  bool operator==(const Normalization&) const = default;
};

// Activations retained by a forward pass for the matching backward pass.
struct ForwardCache {
  struct Step {
    Tensor src;      // padded layer input (reflect mode only)
    Tensor mid;      // residual: relu(conv1) output
    Tensor mid_src;  // residual: padded mid (reflect mode only)
    Tensor out;
  };
  bool filled = false;
  Padding padding = Padding::kReflect;
  Tensor input;
  std::vector<Step> steps;
};

class Model {
 public:
  Model() = default;
  explicit Model(ModelSpec spec);

  const ModelSpec& spec() const { return spec_; }
  std::span<double> params() { return params_; }
  std::span<const double> params() const { return params_; }
  size_t param_count() const { return params_.size(); }

  // He-style initialisation; residual second convolutions start small so
  // blocks begin near identity. Power-law layers start at a = b = 1.
  void Initialize(uint64_t seed);

  Tensor Forward(const Tensor& input, Padding padding,
                 ForwardCache* cache = nullptr) const;

  // Accumulates parameter gradients for the cached forward pass into `grads`.
  // Writes the input gradient when `grad_input` is non-null.
  void Backward(const ForwardCache& cache, const Tensor& grad_output,
                std::span<double> grads, Tensor* grad_input = nullptr) const;

  // Sign pattern of every relu pre-activation; used to detect kinks.
  std::vector<uint8_t> ReluPattern(const Tensor& input, Padding padding) const;

  // Keeps power-law a and b strictly positive.
  void ProjectConstraints();

  // Rounds parameters to 32-bit precision (checkpoint precision).
  void RoundToFloat();

  Normalization input_norm;
  Normalization target_norm;

  // Applies input_norm in place (identity when unset).
  void NormalizeInput(Tensor& x) const;


 private:
  struct Slot {
    ConvShape conv1;
    ConvShape conv2;
    size_t w1 = 0, b1 = 0, w2 = 0, b2 = 0;
  };

  ModelSpec spec_;
  std::vector<Slot> slots_;
  std::vector<double> params_;
};

bool operator==(const LayerSpec& a, const LayerSpec& b);
bool operator==(const ModelSpec& a, const ModelSpec& b);

}  // namespace hcs

#endif  // HCSMAP_NN_MODEL_H_
