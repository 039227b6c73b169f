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

#include "nn/grad_check.h"

#include <algorithm>
#include <cmath>
#include <random>

#include "common/error.h"
#include "nn/losses.h"

namespace hcs {
namespace {

Tensor Channel(const Tensor& t, int k) {
  Tensor out(t.rows(), t.cols(), 1);
  for (int r = 0; r < t.rows(); ++r) {
    for (int c = 0; c < t.cols(); ++c) out.at(r, c, 0) = t.at(r, c, k);
  }
  return out;
}

struct LossAndGrad {
  double loss;
  Tensor grad;  // shaped like the model output
};

LossAndGrad Loss(const Tensor& out, const Tensor& target, LossKind kind) {
  if (kind == LossKind::kMse) {
    Require(out.channels() == 1, "MSE check expects a single output head");
    auto r = MaskedMseLoss(out, target);
    return {r.loss, std::move(r.grad)};
  }
  Require(out.channels() == 2, "NLL check expects mean and log-variance heads");
  auto r = GaussianNllLoss(Channel(out, 0), Channel(out, 1), target);
  Tensor grad(out.rows(), out.cols(), 2);
  for (int row = 0; row < out.rows(); ++row) {
    for (int c = 0; c < out.cols(); ++c) {
      grad.at(row, c, 0) = r.grad_mean.at(row, c, 0);
      grad.at(row, c, 1) = r.grad_log_var.at(row, c, 0);
    }
  }
  return {r.loss, std::move(grad)};
}

Tensor RandomTensor(int rows, int cols, int ch, std::mt19937_64& rng,
                    double lo, double hi) {
  std::uniform_real_distribution<double> dist(lo, hi);
  Tensor t(rows, cols, ch);
  for (double& v : t.data()) v = dist(rng);
  return t;
}

}  // namespace

double EvaluateLoss(const Model& model, const Tensor& input,
                    const Tensor& target, LossKind kind, Padding padding) {
  return Loss(model.Forward(input, padding), target, kind).loss;
}

std::vector<double> AnalyticGradient(const Model& model, const Tensor& input,
                                     const Tensor& target, LossKind kind,
                                     Padding padding, double* loss) {
  ForwardCache cache;
  const Tensor out = model.Forward(input, padding, &cache);
  const LossAndGrad lg = Loss(out, target, kind);
  std::vector<double> grads(model.param_count(), 0.0);
  model.Backward(cache, lg.grad, grads);
  if (loss) *loss = lg.loss;
  return grads;
}

GradCheckResult GradCheck(const Model& model, const Tensor& input,
                          const Tensor& target, LossKind kind, Padding padding,
                          double step) {
  const std::vector<double> analytic =
      AnalyticGradient(model, input, target, kind, padding);
  const std::vector<uint8_t> base_pattern = model.ReluPattern(input, padding);
  Model probe = model;
  GradCheckResult result;
  for (size_t i = 0; i < probe.param_count(); ++i) {
    const double original = probe.params()[i];
    probe.params()[i] = original + step;
    const double plus = EvaluateLoss(probe, input, target, kind, padding);
    const bool kink_plus = probe.ReluPattern(input, padding) != base_pattern;
    probe.params()[i] = original - step;
    const double minus = EvaluateLoss(probe, input, target, kind, padding);
    const bool kink_minus = probe.ReluPattern(input, padding) != base_pattern;
    probe.params()[i] = original;
    if (kink_plus || kink_minus) {
      ++result.skipped_at_kinks;
      continue;
    }
    const double fd = (plus - minus) / (2.0 * step);
    const double denom = std::max({std::abs(analytic[i]), std::abs(fd), 1e-8});
    result.max_rel_error =
        std::max(result.max_rel_error, std::abs(analytic[i] - fd) / denom);
    ++result.checked;
  }
  return result;
}

std::vector<GradCheckCase> RunStandardGradChecks(uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<GradCheckCase> cases;
  auto run = [&](const std::string& name, const ModelSpec& spec,
                 const Tensor& input, LossKind kind, Padding padding) {
    Model model(spec);
    model.Initialize(rng());
    // Non-trivial biases so relu units sit away from zero on average.
    std::normal_distribution<double> jitter(0.0, 0.05);
    for (double& p : model.params()) p += jitter(rng);
    model.ProjectConstraints();
    const Tensor probe = model.Forward(input, padding);
    const Tensor target =
        RandomTensor(probe.rows(), probe.cols(), 1, rng, -1.0, 1.0);
    cases.push_back({name, GradCheck(model, input, target, kind, padding)});
  };

  ModelSpec linear;
  linear.input_channels = 3;
  linear.layers = {{LayerKind::kConv, 1, 1, Activation::kIdentity}};
  run("linear_1x1_mse", linear, RandomTensor(5, 5, 3, rng, -1, 1),
      LossKind::kMse, Padding::kReflect);

  ModelSpec relu_stack;
  relu_stack.input_channels = 2;
  relu_stack.layers = {{LayerKind::kConv, 3, 4, Activation::kRelu},
                       {LayerKind::kConv, 3, 4, Activation::kRelu},
                       {LayerKind::kConv, 1, 1, Activation::kIdentity}};
  run("relu_stack_mse_reflect", relu_stack, RandomTensor(6, 6, 2, rng, -1, 1),
      LossKind::kMse, Padding::kReflect);
  run("relu_stack_mse_valid", relu_stack, RandomTensor(8, 8, 2, rng, -1, 1),
      LossKind::kMse, Padding::kValid);

  const ModelSpec residual = CanopyModelSpec(3, 4, 1);
  run("residual_mse_reflect", residual, RandomTensor(6, 6, 3, rng, -1, 1),
      LossKind::kMse, Padding::kReflect);
  run("residual_mse_valid", residual, RandomTensor(9, 9, 3, rng, -1, 1),
      LossKind::kMse, Padding::kValid);

  const ModelSpec power = CarbonModelSpec(3, 2, true);
  run("power_law_nll_reflect", power, RandomTensor(6, 6, 1, rng, 0.2, 2.0),
      LossKind::kGaussianNll, Padding::kReflect);

  const ModelSpec carbon = CarbonModelSpec(4, 2, false);
  run("carbon_nll_valid", carbon, RandomTensor(8, 8, 1, rng, -1, 1),
      LossKind::kGaussianNll, Padding::kValid);

  ModelSpec power_mse;
  power_mse.input_channels = 1;
  power_mse.layers = {{LayerKind::kPowerLaw, 1, 1, Activation::kIdentity},
                      {LayerKind::kConv, 3, 1, Activation::kIdentity}};
  run("power_law_mse", power_mse, RandomTensor(5, 5, 1, rng, 0.2, 2.0),
      LossKind::kMse, Padding::kReflect);
  return cases;
}

}  // namespace hcs
