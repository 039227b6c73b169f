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

#ifndef HCSMAP_NN_ADAM_H_
#define HCSMAP_NN_ADAM_H_

#include <cstdint>
#include <span>
#include <vector>

namespace hcs {

struct AdamConfig {
  double learning_rate = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

// Bias-corrected ADAM over a flat parameter vector.
class AdamState {
 public:
  AdamState(size_t parameter_count, AdamConfig config = {});

  // Throws "diverged" on a non-finite gradient without touching state.
  void Step(std::span<double> params, std::span<const double> grads);

  int64_t step_count() const { return step_count_; }
  const AdamConfig& config() const { return config_; }
  const std::vector<double>& first_moment() const { return m_; }
  const std::vector<double>& second_moment() const { return v_; }

 private:
  AdamConfig config_;
  int64_t step_count_ = 0;
  std::vector<double> m_;
  std::vector<double> v_;
};

}  // namespace hcs

#endif  // HCSMAP_NN_ADAM_H_
