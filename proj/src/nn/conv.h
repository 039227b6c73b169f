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

#ifndef HCSMAP_NN_CONV_H_
#define HCSMAP_NN_CONV_H_

#include <cstddef>
#include <span>
#include <vector>

#include "nn/tensor.h"

namespace hcs {

enum class Activation { kIdentity, kRelu };

// kReflect keeps the spatial size by reflection-padding each layer input;
// kValid shrinks the output by kernel - 1 and is used when the caller has
// already supplied enough context around the region of interest.
enum class Padding { kReflect, kValid };

struct ConvShape {
  int kernel = 3;  // 1 or 3, stride 1
  int in_channels = 1;
  int out_channels = 1;
  Activation activation = Activation::kRelu;

  int radius() const { return kernel / 2; }
  // Weights are laid out [ky][kx][in][out].
  size_t weight_count() const {
    return static_cast<size_t>(kernel) * kernel * in_channels * out_channels;
  }
};

// Stand-alone convolution layer owning its parameters.
struct ConvLayer {
  ConvShape shape;
  std::vector<double> weights;
  std::vector<double> bias;
};

Tensor ReflectPad(const Tensor& input, int radius);

// Adjoint of ReflectPad: sums gradients of mirrored cells back onto their
// source cells.
Tensor FoldReflectPad(const Tensor& grad_padded, int radius);

// Removes `margin` pixels from every side.
Tensor CropBorder(const Tensor& input, int margin);

Tensor ConvValid(const Tensor& src, const ConvShape& shape,
                 std::span<const double> weights, std::span<const double> bias);

// Gradient of a ConvValid call. `out` is the post-activation output of the
// forward call and `grad_out` the loss gradient with respect to it. Weight and
// bias gradients are accumulated; `grad_src` (optional) is overwritten.
void ConvValidBackward(const Tensor& src, const Tensor& out,
                       const Tensor& grad_out, const ConvShape& shape,
                       std::span<const double> weights,
                       std::span<double> grad_weights,
                       std::span<double> grad_bias, Tensor* grad_src);

Tensor ConvForward(const Tensor& input, const ConvLayer& layer,
                   Padding padding = Padding::kReflect);

}  // namespace hcs

#endif  // HCSMAP_NN_CONV_H_
