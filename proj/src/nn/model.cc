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

#include "nn/model.h"

#include <cmath>
#include <random>

#include "common/error.h"

namespace hcs {

bool operator==(const LayerSpec& a, const LayerSpec& b) {
  return a.kind == b.kind && a.kernel == b.kernel &&
         a.out_channels == b.out_channels && a.activation == b.activation;
}

bool operator==(const ModelSpec& a, const ModelSpec& b) {
  return a.input_channels == b.input_channels && a.layers == b.layers;
}

int ModelSpec::ThreeByThreeLayers() const {
  int n = 0;
  for (const auto& l : layers) {
    if (l.kind == LayerKind::kResidual) n += 2;
    if (l.kind == LayerKind::kConv && l.kernel == 3) n += 1;
  }
  return n;
}

int ModelSpec::ReceptiveField() const { return 1 + 2 * ThreeByThreeLayers(); }

int ModelSpec::OutputChannels() const {
  int ch = input_channels;
  for (const auto& l : layers) {
    if (l.kind != LayerKind::kPowerLaw) ch = l.out_channels;
  }
  return ch;
}

ModelSpec CanopyModelSpec(int input_channels, int width, int blocks) {
  Require(width > 0 && blocks >= 0, "invalid canopy architecture");
  ModelSpec spec;
  spec.input_channels = input_channels;
  spec.layers.push_back({LayerKind::kConv, 3, width, Activation::kRelu});
  for (int i = 0; i < blocks; ++i) {
    spec.layers.push_back({LayerKind::kResidual, 3, width, Activation::kRelu});
  }
  spec.layers.push_back({LayerKind::kConv, 1, 1, Activation::kIdentity});
  return spec;
}

ModelSpec CarbonModelSpec(int width, int conv_layers, bool power_law) {
  Require(width > 0 && conv_layers > 0, "invalid carbon architecture");
  ModelSpec spec;
  spec.input_channels = 1;
  if (power_law) spec.layers.push_back({LayerKind::kPowerLaw, 1, 1, Activation::kIdentity});
  for (int i = 0; i < conv_layers; ++i) {
    spec.layers.push_back({LayerKind::kConv, 3, width, Activation::kRelu});
  }
  spec.layers.push_back({LayerKind::kConv, 1, 2, Activation::kIdentity});
  return spec;
}

Model::Model(ModelSpec spec) : spec_(std::move(spec)) {
  Require(!spec_.layers.empty(), "model has no layers");
  int ch = spec_.input_channels;
  size_t offset = 0;
  auto place = [&](const ConvShape& s, size_t& w, size_t& b) {
    w = offset;
    offset += s.weight_count();
    b = offset;
    offset += s.out_channels;
  };
  for (const auto& layer : spec_.layers) {
    Slot slot;
    switch (layer.kind) {
      case LayerKind::kConv:
        Require(layer.kernel == 1 || layer.kernel == 3, "kernel must be 1 or 3");
        slot.conv1 = {layer.kernel, ch, layer.out_channels, layer.activation};
        place(slot.conv1, slot.w1, slot.b1);
        ch = layer.out_channels;
        break;
      case LayerKind::kResidual:
        Require(layer.out_channels == ch,
                "residual block must preserve channel count");
        slot.conv1 = {3, ch, ch, Activation::kRelu};
        slot.conv2 = {3, ch, ch, Activation::kIdentity};
        place(slot.conv1, slot.w1, slot.b1);
        place(slot.conv2, slot.w2, slot.b2);
        break;
      case LayerKind::kPowerLaw:
        slot.w1 = offset;  // a, then b
        offset += 2;
        break;
    }
    slots_.push_back(slot);
  }
  params_.assign(offset, 0.0);
}

void Model::Initialize(uint64_t seed) {
  std::mt19937_64 rng(seed);
  auto fill = [&](const ConvShape& s, size_t w, double gain) {
    const double fan_in = static_cast<double>(s.kernel * s.kernel * s.in_channels);
    std::normal_distribution<double> dist(0.0, gain / std::sqrt(fan_in));
    for (size_t i = 0; i < s.weight_count(); ++i) params_[w + i] = dist(rng);
  };
  std::fill(params_.begin(), params_.end(), 0.0);
  for (size_t i = 0; i < slots_.size(); ++i) {
    const Slot& s = slots_[i];
    switch (spec_.layers[i].kind) {
      case LayerKind::kConv:
        fill(s.conv1, s.w1,
             s.conv1.activation == Activation::kRelu ? std::sqrt(2.0) : 1.0);
        break;
      case LayerKind::kResidual:
        fill(s.conv1, s.w1, std::sqrt(2.0));
        fill(s.conv2, s.w2, 0.1);
        break;
      case LayerKind::kPowerLaw:
        params_[s.w1] = 1.0;
        params_[s.w1 + 1] = 1.0;
        break;
    }
  }
}

void Model::NormalizeInput(Tensor& x) const {
  if (input_norm.shift.empty()) return;
  Require(static_cast<int>(input_norm.shift.size()) == x.channels() &&
              input_norm.scale.size() == input_norm.shift.size(),
          "input normalisation does not match channel count");
  const int ch = x.channels();
  auto d = x.data();
  for (size_t i = 0; i < d.size(); ++i) {
    const size_t k = i % ch;
    d[i] = (d[i] - input_norm.shift[k]) / input_norm.scale[k];
  }
}

Tensor Model::Forward(const Tensor& input, Padding padding,
                      ForwardCache* cache) const {
  if (input.channels() != spec_.input_channels) {
    Fail(ErrorCode::kInvalidArgument, "channel mismatch: input has ",
         input.channels(), ", model expects ", spec_.input_channels);
  }
  const std::span<const double> p = params_;
  auto weights = [&](const ConvShape& s, size_t w) {
    return p.subspan(w, s.weight_count());
  };
  auto bias = [&](const ConvShape& s, size_t b) {
    return p.subspan(b, s.out_channels);
  };
  const bool reflect = padding == Padding::kReflect;
  if (cache) {
    cache->filled = false;
    cache->padding = padding;
    cache->input = input;
    cache->steps.assign(slots_.size(), {});
  }
  Tensor x = input;
  for (size_t i = 0; i < slots_.size(); ++i) {
    const Slot& s = slots_[i];
    ForwardCache::Step step;
    switch (spec_.layers[i].kind) {
      case LayerKind::kConv: {
        if (reflect && s.conv1.kernel > 1) {
          step.src = ReflectPad(x, s.conv1.radius());
          step.out = ConvValid(step.src, s.conv1, weights(s.conv1, s.w1), bias(s.conv1, s.b1));
        } else {
          step.out = ConvValid(x, s.conv1, weights(s.conv1, s.w1), bias(s.conv1, s.b1));
        }
        break;
      }
      case LayerKind::kResidual: {
        Tensor skip;
        if (reflect) {
          step.src = ReflectPad(x, 1);
          step.mid = ConvValid(step.src, s.conv1, weights(s.conv1, s.w1), bias(s.conv1, s.b1));
          step.mid_src = ReflectPad(step.mid, 1);
          step.out = ConvValid(step.mid_src, s.conv2, weights(s.conv2, s.w2), bias(s.conv2, s.b2));
          skip = std::move(x);
        } else {
          step.mid = ConvValid(x, s.conv1, weights(s.conv1, s.w1), bias(s.conv1, s.b1));
          step.out = ConvValid(step.mid, s.conv2, weights(s.conv2, s.w2), bias(s.conv2, s.b2));
          skip = CropBorder(x, 2);
        }
        auto o = step.out.data();
        auto k = skip.data();
        for (size_t j = 0; j < o.size(); ++j) o[j] += k[j];
        break;
      }
      case LayerKind::kPowerLaw: {
        const double a = p[s.w1], b = p[s.w1 + 1];
        step.out = Tensor(x.rows(), x.cols(), x.channels());
        auto o = step.out.data();
        auto in = x.data();
        for (size_t j = 0; j < o.size(); ++j) {
          o[j] = a * std::pow(std::max(in[j], kPowerLawEpsilon), b);
        }
        break;
      }
    }
    if (cache) {
      x = step.out;
      cache->steps[i] = std::move(step);
    } else {
      x = std::move(step.out);
    }
  }
  if (cache) cache->filled = true;
  return x;
}

void Model::Backward(const ForwardCache& cache, const Tensor& grad_output,
                     std::span<double> grads, Tensor* grad_input) const {
  if (!cache.filled || cache.steps.size() != slots_.size()) {
    Fail(ErrorCode::kRuntime, "backward called without a cached forward pass");
  }
  Require(grads.size() == params_.size(), "gradient buffer size mismatch");
  Require(grad_output.SameShape(cache.steps.back().out),
          "upstream gradient shape mismatch");
  const std::span<const double> p = params_;
  const bool reflect = cache.padding == Padding::kReflect;
  Tensor grad = grad_output;
  for (size_t idx = slots_.size(); idx-- > 0;) {
    const Slot& s = slots_[idx];
    const auto& step = cache.steps[idx];
    const Tensor& in = idx == 0 ? cache.input : cache.steps[idx - 1].out;
    const bool need_input_grad = idx > 0 || grad_input != nullptr;
    Tensor grad_in;
    switch (spec_.layers[idx].kind) {
      case LayerKind::kConv: {
        const bool padded = reflect && s.conv1.kernel > 1;
        const Tensor& src = padded ? step.src : in;
        Tensor grad_src;
        ConvValidBackward(src, step.out, grad, s.conv1,
                          p.subspan(s.w1, s.conv1.weight_count()),
                          grads.subspan(s.w1, s.conv1.weight_count()),
                          grads.subspan(s.b1, s.conv1.out_channels),
                          need_input_grad ? &grad_src : nullptr);
        if (need_input_grad) {
          grad_in = padded ? FoldReflectPad(grad_src, s.conv1.radius())
                           : std::move(grad_src);
        }
        break;
      }
      case LayerKind::kResidual: {
        Tensor grad_mid_src;
        ConvValidBackward(reflect ? step.mid_src : step.mid, step.out, grad,
                          s.conv2, p.subspan(s.w2, s.conv2.weight_count()),
                          grads.subspan(s.w2, s.conv2.weight_count()),
                          grads.subspan(s.b2, s.conv2.out_channels),
                          &grad_mid_src);
        const Tensor grad_mid =
            reflect ? FoldReflectPad(grad_mid_src, 1) : std::move(grad_mid_src);
        Tensor grad_src;
        ConvValidBackward(reflect ? step.src : in, step.mid, grad_mid, s.conv1,
                          p.subspan(s.w1, s.conv1.weight_count()),
                          grads.subspan(s.w1, s.conv1.weight_count()),
                          grads.subspan(s.b1, s.conv1.out_channels),
                          need_input_grad ? &grad_src : nullptr);
        if (need_input_grad) {
          grad_in = reflect ? FoldReflectPad(grad_src, 1) : std::move(grad_src);
          // Skip path.
          const int margin = reflect ? 0 : 2;
          const int ch = grad.channels();
          for (int r = 0; r < grad.rows(); ++r) {
            for (int c = 0; c < grad.cols(); ++c) {
              const double* g = grad.pixel(r, c);
              double* dst = grad_in.pixel(r + margin, c + margin);
              for (int k = 0; k < ch; ++k) dst[k] += g[k];
            }
          }
        }
        break;
      }
      case LayerKind::kPowerLaw: {
        const double a = p[s.w1], b = p[s.w1 + 1];
        auto x = in.data();
        auto g = grad.data();
        double ga = 0.0, gb = 0.0;
        if (need_input_grad) grad_in = Tensor(in.rows(), in.cols(), in.channels());
        for (size_t j = 0; j < x.size(); ++j) {
          const double xc = std::max(x[j], kPowerLawEpsilon);
          const double xb = std::pow(xc, b);
          ga += g[j] * xb;
          gb += g[j] * a * xb * std::log(xc);
          if (need_input_grad && x[j] > kPowerLawEpsilon) {
            grad_in.data()[j] = g[j] * a * b * xb / xc;
          }
        }
        grads[s.w1] += ga;
        grads[s.w1 + 1] += gb;
        break;
      }
    }
    grad = std::move(grad_in);
  }
  if (grad_input) *grad_input = std::move(grad);
}

std::vector<uint8_t> Model::ReluPattern(const Tensor& input,
                                        Padding padding) const {
  ForwardCache cache;
  Forward(input, padding, &cache);
  std::vector<uint8_t> pattern;
  auto append = [&](const Tensor& t) {
    for (double v : t.data()) pattern.push_back(v > 0.0 ? 1 : 0);
  };
  for (size_t i = 0; i < slots_.size(); ++i) {
    const auto& layer = spec_.layers[i];
    if (layer.kind == LayerKind::kResidual) append(cache.steps[i].mid);
    if (layer.kind == LayerKind::kConv && layer.activation == Activation::kRelu) {
      append(cache.steps[i].out);
    }
  }
  return pattern;
}

void Model::ProjectConstraints() {
  for (size_t i = 0; i < slots_.size(); ++i) {
    if (spec_.layers[i].kind != LayerKind::kPowerLaw) continue;
    params_[slots_[i].w1] = std::max(params_[slots_[i].w1], kPowerLawEpsilon);
    params_[slots_[i].w1 + 1] = std::max(params_[slots_[i].w1 + 1], kPowerLawEpsilon);
  }
}

void Model::RoundToFloat() {
  for (double& v : params_) v = static_cast<float>(v);
}

}  // namespace hcs
