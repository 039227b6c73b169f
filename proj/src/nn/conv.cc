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

#include "nn/conv.h"

#include <Eigen/Core>

#include "common/error.h"
#include "grid/patch.h"

namespace hcs {
namespace {

using RowMatrix =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ConstMap = Eigen::Map<const RowMatrix>;
using MutMap = Eigen::Map<RowMatrix>;

void CheckLayer(const Tensor& src, const ConvShape& shape,
                std::span<const double> weights,
                std::span<const double> bias) {
  Require(shape.kernel == 1 || shape.kernel == 3, "kernel must be 1 or 3");
  if (src.channels() != shape.in_channels) {
    Fail(ErrorCode::kInvalidArgument, "channel mismatch: input has ",
         src.channels(), ", layer expects ", shape.in_channels);
  }
  Require(weights.size() == shape.weight_count(), "weight count mismatch");
  Require(bias.size() == static_cast<size_t>(shape.out_channels),
          "bias count mismatch");
  Require(src.rows() >= shape.kernel && src.cols() >= shape.kernel,
          "input smaller than kernel");
}

// Rows are output pixels, columns are (ky, kx, in) taps.
RowMatrix Im2Col(const Tensor& src, int k, int out_rows, int out_cols) {
  const int cin = src.channels();
  RowMatrix col(static_cast<Eigen::Index>(out_rows) * out_cols, k * k * cin);
  for (int r = 0; r < out_rows; ++r) {
    for (int c = 0; c < out_cols; ++c) {
      double* dst = col.row(static_cast<Eigen::Index>(r) * out_cols + c).data();
      for (int ky = 0; ky < k; ++ky) {
        for (int kx = 0; kx < k; ++kx) {
          const double* p = src.pixel(r + ky, c + kx);
          std::copy(p, p + cin, dst + (ky * k + kx) * cin);
        }
      }
    }
  }
  return col;
}

}  // namespace

Tensor ReflectPad(const Tensor& input, int radius) {
  if (radius == 0) return input;
  Tensor out(input.rows() + 2 * radius, input.cols() + 2 * radius,
             input.channels());
  const int ch = input.channels();
  for (int r = 0; r < out.rows(); ++r) {
    const int sr = ReflectIndex(r - radius, input.rows());
    for (int c = 0; c < out.cols(); ++c) {
      const int sc = ReflectIndex(c - radius, input.cols());
      std::copy(input.pixel(sr, sc), input.pixel(sr, sc) + ch, out.pixel(r, c));
    }
  }
  return out;
}

Tensor FoldReflectPad(const Tensor& grad_padded, int radius) {
  if (radius == 0) return grad_padded;
  const int rows = grad_padded.rows() - 2 * radius;
  const int cols = grad_padded.cols() - 2 * radius;
  const int ch = grad_padded.channels();
  Tensor out(rows, cols, ch);
  for (int r = 0; r < grad_padded.rows(); ++r) {
    const int sr = ReflectIndex(r - radius, rows);
    for (int c = 0; c < grad_padded.cols(); ++c) {
      const int sc = ReflectIndex(c - radius, cols);
      const double* g = grad_padded.pixel(r, c);
      double* dst = out.pixel(sr, sc);
      for (int k = 0; k < ch; ++k) dst[k] += g[k];
    }
  }
  return out;
}

Tensor CropBorder(const Tensor& input, int margin) {
  if (margin == 0) return input;
  Require(input.rows() > 2 * margin && input.cols() > 2 * margin,
          "tensor too small to crop");
  Tensor out(input.rows() - 2 * margin, input.cols() - 2 * margin,
             input.channels());
  const int ch = input.channels();
  for (int r = 0; r < out.rows(); ++r) {
    std::copy(input.pixel(r + margin, margin),
              input.pixel(r + margin, margin) + out.cols() * ch,
              out.pixel(r, 0));
  }
  return out;
}

Tensor ConvValid(const Tensor& src, const ConvShape& shape,
                 std::span<const double> weights,
                 std::span<const double> bias) {
  CheckLayer(src, shape, weights, bias);
  const int k = shape.kernel;
  const int out_rows = src.rows() - k + 1;
  const int out_cols = src.cols() - k + 1;
  const Eigen::Index m = static_cast<Eigen::Index>(out_rows) * out_cols;
  const Eigen::Index kk = static_cast<Eigen::Index>(k) * k * shape.in_channels;
  const Eigen::Index n = shape.out_channels;
  Tensor out(out_rows, out_cols, shape.out_channels);
  MutMap y(out.data().data(), m, n);
  ConstMap w(weights.data(), kk, n);
  if (k == 1) {
    y.noalias() = ConstMap(src.data().data(), m, kk) * w;
  } else {
    const RowMatrix col = Im2Col(src, k, out_rows, out_cols);
    y.noalias() = col * w;
  }
  const Eigen::Map<const Eigen::RowVectorXd> b(bias.data(), n);
  y.rowwise() += b;
  if (shape.activation == Activation::kRelu) y = y.cwiseMax(0.0);
  return out;
}

void ConvValidBackward(const Tensor& src, const Tensor& out,
                       const Tensor& grad_out, const ConvShape& shape,
                       std::span<const double> weights,
                       std::span<double> grad_weights,
                       std::span<double> grad_bias, Tensor* grad_src) {
  CheckLayer(src, shape, weights, grad_bias);
  Require(out.SameShape(grad_out), "gradient shape mismatch");
  Require(grad_weights.size() == weights.size(), "gradient size mismatch");
  const int k = shape.kernel;
  const int out_rows = out.rows();
  const int out_cols = out.cols();
  const Eigen::Index m = static_cast<Eigen::Index>(out_rows) * out_cols;
  const Eigen::Index kk = static_cast<Eigen::Index>(k) * k * shape.in_channels;
  const Eigen::Index n = shape.out_channels;

  RowMatrix dz = ConstMap(grad_out.data().data(), m, n);
  if (shape.activation == Activation::kRelu) {
    // Subgradient 0 at the kink.
    const ConstMap y(out.data().data(), m, n);
    dz = (y.array() > 0.0).select(dz, 0.0);
  }
  Eigen::Map<Eigen::RowVectorXd>(grad_bias.data(), n) += dz.colwise().sum();
  MutMap gw(grad_weights.data(), kk, n);
  ConstMap w(weights.data(), kk, n);

  if (k == 1) {
    const ConstMap x(src.data().data(), m, kk);
    gw.noalias() += x.transpose() * dz;
    if (grad_src) {
      *grad_src = Tensor(src.rows(), src.cols(), src.channels());
      MutMap(grad_src->data().data(), m, kk).noalias() = dz * w.transpose();
    }
    return;
  }
  const RowMatrix col = Im2Col(src, k, out_rows, out_cols);
  gw.noalias() += col.transpose() * dz;
  if (!grad_src) return;
  const RowMatrix dcol = dz * w.transpose();
  *grad_src = Tensor(src.rows(), src.cols(), src.channels());
  const int cin = src.channels();
  for (int r = 0; r < out_rows; ++r) {
    for (int c = 0; c < out_cols; ++c) {
      const double* g =
          dcol.row(static_cast<Eigen::Index>(r) * out_cols + c).data();
      for (int ky = 0; ky < k; ++ky) {
        for (int kx = 0; kx < k; ++kx) {
          double* dst = grad_src->pixel(r + ky, c + kx);
          const double* tap = g + (ky * k + kx) * cin;
          for (int ch = 0; ch < cin; ++ch) dst[ch] += tap[ch];
        }
      }
    }
  }
}

Tensor ConvForward(const Tensor& input, const ConvLayer& layer,
                   Padding padding) {
  if (input.channels() != layer.shape.in_channels) {
    Fail(ErrorCode::kInvalidArgument, "channel mismatch: input has ",
         input.channels(), ", layer expects ", layer.shape.in_channels);
  }
  if (padding == Padding::kValid) {
    return ConvValid(input, layer.shape, layer.weights, layer.bias);
  }
  return ConvValid(ReflectPad(input, layer.shape.radius()), layer.shape,
                   layer.weights, layer.bias);
}

}  // namespace hcs
