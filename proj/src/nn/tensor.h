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

#ifndef HCSMAP_NN_TENSOR_H_
#define HCSMAP_NN_TENSOR_H_

#include <cstddef>
#include <span>
#include <vector>

namespace hcs {

// Dense rows x cols x channels array, channel-fastest (HWC). Storage is 64-bit
// so that finite-difference checks and loss reductions stay accurate; grids
// and checkpoints on disk are 32-bit.
class Tensor {
 public:
  Tensor() = default;
  Tensor(int rows, int cols, int channels, double fill = 0.0)
      : rows_(rows),
        cols_(cols),
        channels_(channels),
        data_(static_cast<size_t>(rows) * cols * channels, fill) {}

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  int channels() const { return channels_; }
  size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  double& at(int r, int c, int k) { return data_[Index(r, c, k)]; }
  double at(int r, int c, int k) const { return data_[Index(r, c, k)]; }

  // Pointer to the channel vector of pixel (r, c).
  double* pixel(int r, int c) { return data_.data() + Index(r, c, 0); }
  const double* pixel(int r, int c) const {
    return data_.data() + Index(r, c, 0);
  }

  std::span<double> data() { return data_; }
  std::span<const double> data() const { return data_; }

  bool SameShape(const Tensor& other) const {
    return rows_ == other.rows_ && cols_ == other.cols_ &&
           channels_ == other.channels_;
  }

 private:
  size_t Index(int r, int c, int k) const {
    return (static_cast<size_t>(r) * cols_ + c) * channels_ + k;
  }

  int rows_ = 0;
  int cols_ = 0;
  int channels_ = 0;
  std::vector<double> data_;
};

}  // namespace hcs

#endif  // HCSMAP_NN_TENSOR_H_
