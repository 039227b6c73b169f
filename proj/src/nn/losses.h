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

#ifndef HCSMAP_NN_LOSSES_H_
#define HCSMAP_NN_LOSSES_H_

#include <cstdint>
#include <span>

#include "nn/tensor.h"

namespace hcs {

struct MseResult {
  double loss = 0.0;
  Tensor grad;  // d loss / d pred, zero where invalid
};

// Mean of (pred - target)^2 over elements with valid[i] != 0. An empty
// `valid` span means every element is valid.
MseResult MaskedMseLoss(const Tensor& pred, const Tensor& target,
                        std::span<const uint8_t> valid = {});

struct NllResult {
  double loss = 0.0;
  Tensor grad_mean;
  Tensor grad_log_var;
};

// Mean over valid elements of
//   0.5 * (log_var + (target - mean)^2 * exp(-log_var) + ln(2 pi)).
NllResult GaussianNllLoss(const Tensor& mean, const Tensor& log_var,
                          const Tensor& target,
                          std::span<const uint8_t> valid = {});

}  // namespace hcs

#endif  // HCSMAP_NN_LOSSES_H_
