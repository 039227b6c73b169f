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

#ifndef HCSMAP_SYNTH_VALUE_NOISE_H_
#define HCSMAP_SYNTH_VALUE_NOISE_H_

#include <cstdint>
#include <vector>

namespace hcs {

// Lag, in lattice spacings, at which the autocorrelation of quintic value
// noise falls to 1/e. Obtained by numerically integrating the interpolation
// kernel overlap.
constexpr double kValueNoiseEFoldingLag = 0.7341645560631181;

// Row-major width x height field of seeded lattice values in [0, 1] blended
// with quintic smoothstep weights. `correlation_length` is the 1/e lag of
// the field's autocorrelation, in pixels.
std::vector<double> ValueNoise(int width, int height, double correlation_length,
                               uint64_t seed);

// Replaces each value by its rank / (n - 1) (ties broken by index), giving an
// exactly uniform marginal with the same spatial ordering.
std::vector<double> RankUniform(const std::vector<double>& field);

}  // namespace hcs

#endif  // HCSMAP_SYNTH_VALUE_NOISE_H_
