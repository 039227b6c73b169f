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

#ifndef HCSMAP_NN_GRAD_CHECK_H_
#define HCSMAP_NN_GRAD_CHECK_H_

#include <string>
#include <vector>

#include "nn/model.h"

namespace hcs {

enum class LossKind { kMse, kGaussianNll };

struct GradCheckResult {
  double max_rel_error = 0.0;
  size_t checked = 0;
  // Parameters whose +/- step flipped a relu; central differences are not
  // meaningful across a kink so they are excluded.
  size_t skipped_at_kinks = 0;
};

// Loss of `model` on (input, target) with all pixels valid. For kGaussianNll
// the model must have mean and log-variance heads.
double EvaluateLoss(const Model& model, const Tensor& input,
                    const Tensor& target, LossKind kind, Padding padding);

// Analytic loss gradient via Model::Backward.
std::vector<double> AnalyticGradient(const Model& model, const Tensor& input,
                                     const Tensor& target, LossKind kind,
                                     Padding padding, double* loss = nullptr);

// Max over parameters of |analytic - central difference| /
// max(|analytic|, |fd|, 1e-8) with step 1e-3, all in 64-bit.
GradCheckResult GradCheck(const Model& model, const Tensor& input,
                          const Tensor& target, LossKind kind,
                          Padding padding = Padding::kReflect,
                          double step = 1e-3);

struct GradCheckCase {
  std::string name;
  GradCheckResult result;
};

// The fixed suite behind the `grad-check` command: a linear 1x1 model, a relu
// stack and a residual stack under MSE, a power-law carbon model and a plain
// carbon model under Gaussian NLL, in both padding modes.
std::vector<GradCheckCase> RunStandardGradChecks(uint64_t seed = 7);

}  // namespace hcs

#endif  // HCSMAP_NN_GRAD_CHECK_H_
