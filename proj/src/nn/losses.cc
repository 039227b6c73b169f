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

#include "nn/losses.h"

#include <cmath>
#include <numbers>

#include "common/error.h"

namespace hcs {
namespace {

size_t CountValid(size_t n, std::span<const uint8_t> valid) {
  if (valid.empty()) return n;
  Require(valid.size() == n, "mask size mismatch");
  size_t count = 0;
  for (uint8_t v : valid) count += v != 0;
  return count;
}

}  // namespace

MseResult MaskedMseLoss(const Tensor& pred, const Tensor& target,
                        std::span<const uint8_t> valid) {
  Require(pred.SameShape(target), "prediction/target shape mismatch");
  const size_t n = CountValid(pred.size(), valid);
  if (n == 0) Fail(ErrorCode::kInvalidArgument, "empty supervision");
  MseResult result;
  result.grad = Tensor(pred.rows(), pred.cols(), pred.channels());
  const auto p = pred.data();
  const auto t = target.data();
  auto g = result.grad.data();
  const double inv_n = 1.0 / static_cast<double>(n);
  double sum = 0.0;
  for (size_t i = 0; i < p.size(); ++i) {
    if (!valid.empty() && !valid[i]) continue;
    const double d = p[i] - t[i];
    sum += d * d;
    g[i] = 2.0 * d * inv_n;
  }
  result.loss = sum * inv_n;
  return result;
}

NllResult GaussianNllLoss(const Tensor& mean, const Tensor& log_var,
                          const Tensor& target,
                          std::span<const uint8_t> valid) {
  Require(mean.SameShape(target) && log_var.SameShape(target),
          "mean/log_var/target shape mismatch");
  const size_t n = CountValid(mean.size(), valid);
  if (n == 0) Fail(ErrorCode::kInvalidArgument, "empty supervision");
  NllResult result;
  result.grad_mean = Tensor(mean.rows(), mean.cols(), mean.channels());
  result.grad_log_var = Tensor(mean.rows(), mean.cols(), mean.channels());
  const double log_two_pi = std::log(2.0 * std::numbers::pi);
  const double inv_n = 1.0 / static_cast<double>(n);
  const auto m = mean.data();
  const auto lv = log_var.data();
  const auto t = target.data();
  auto gm = result.grad_mean.data();
  auto glv = result.grad_log_var.data();
  double sum = 0.0;
  for (size_t i = 0; i < m.size(); ++i) {
    if (!valid.empty() && !valid[i]) continue;
    const double r = t[i] - m[i];
    const double precision = std::exp(-lv[i]);
    sum += 0.5 * (lv[i] + r * r * precision + log_two_pi);
    gm[i] = -r * precision * inv_n;
    glv[i] = 0.5 * (1.0 - r * r * precision) * inv_n;
  }
  result.loss = sum * inv_n;
  return result;
}

}  // namespace hcs
