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

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "common/error.h"
#include "nn/adam.h"
#include "nn/checkpoint.h"
#include "nn/conv.h"
#include "nn/grad_check.h"
#include "nn/losses.h"
#include "nn/model.h"
#include "test_util.h"

namespace hcs {
namespace {

using testing::BruteForceConv;
using testing::RandomTensor;

ConvLayer RandomLayer(int kernel, int in, int out, Activation act, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  ConvLayer layer{{kernel, in, out, act}, {}, {}};
  layer.weights.resize(layer.shape.weight_count());
  layer.bias.resize(out);
  for (double& w : layer.weights) w = u(rng);
  for (double& b : layer.bias) b = u(rng);
  return layer;
}

TEST(ConvForwardTest, OneByOneUnitKernelIsIdentity) {
  std::mt19937_64 rng(1);
  Tensor x = RandomTensor(6, 5, 1, rng);
  ConvLayer layer{{1, 1, 1, Activation::kIdentity}, {1.0}, {0.0}};
  Tensor y = ConvForward(x, layer);
  ASSERT_TRUE(y.SameShape(x));
  for (size_t i = 0; i < x.size(); ++i) EXPECT_EQ(y.data()[i], x.data()[i]);
}

TEST(ConvForwardTest, AllOnesKernelOnConstantGivesNineC) {
  Tensor x(7, 7, 1, 2.5);
  ConvLayer layer{{3, 1, 1, Activation::kIdentity}, std::vector<double>(9, 1.0), {0.0}};
  Tensor y = ConvForward(x, layer);
  for (int r = 1; r < 6; ++r) {
    for (int c = 1; c < 6; ++c) EXPECT_DOUBLE_EQ(y.at(r, c, 0), 22.5);
  }
}

TEST(ConvForwardTest, MatchesBruteForceOnRandomInstances) {
  std::mt19937_64 rng(2024);
  std::uniform_int_distribution<int> channels(1, 4);
  std::uniform_int_distribution<int> size(3, 9);
  double max_err = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    const int kernel = trial % 5 == 0 ? 1 : 3;
    const Activation act = trial % 2 ? Activation::kRelu : Activation::kIdentity;
    const bool reflect = trial % 3 != 0;
    ConvLayer layer = RandomLayer(kernel, channels(rng), channels(rng), act, rng);
    Tensor x = RandomTensor(size(rng), size(rng), layer.shape.in_channels, rng);
    Tensor got = ConvForward(x, layer, reflect ? Padding::kReflect : Padding::kValid);
    Tensor want = BruteForceConv(x, layer.shape, layer.weights, layer.bias, reflect);
    ASSERT_TRUE(got.SameShape(want));
    for (size_t i = 0; i < got.size(); ++i) {
      max_err = std::max(max_err, std::abs(got.data()[i] - want.data()[i]));
    }
  }
  EXPECT_LT(max_err, 1e-6);
}

TEST(ConvForwardTest, ChannelMismatchIsAnError) {
  std::mt19937_64 rng(3);
  ConvLayer layer = RandomLayer(3, 2, 1, Activation::kRelu, rng);
  EXPECT_THROW(ConvForward(Tensor(5, 5, 3), layer), Error);
}

TEST(ReflectPadTest, FoldIsAdjointOfPad) {
  // <Pad(x), y> == <x, Fold(y)> for random x, y.
  std::mt19937_64 rng(4);
  Tensor x = RandomTensor(5, 6, 2, rng);
  Tensor y = RandomTensor(7, 8, 2, rng);
  Tensor px = ReflectPad(x, 1);
  Tensor fy = FoldReflectPad(y, 1);
  double lhs = 0.0, rhs = 0.0;
  for (size_t i = 0; i < y.size(); ++i) lhs += px.data()[i] * y.data()[i];
  for (size_t i = 0; i < x.size(); ++i) rhs += x.data()[i] * fy.data()[i];
  EXPECT_NEAR(lhs, rhs, 1e-12);
}

TEST(MseLossTest, ExactPredictionHasZeroLossAndGradient) {
  std::mt19937_64 rng(5);
  Tensor t = RandomTensor(4, 4, 1, rng);
  MseResult r = MaskedMseLoss(t, t);
  EXPECT_EQ(r.loss, 0.0);
  for (double g : r.grad.data()) EXPECT_EQ(g, 0.0);
}

TEST(MseLossTest, SingleValidPixelHandValue) {
  Tensor pred(2, 2, 1, 0.0), target(2, 2, 1, 0.0);
  pred.at(1, 0, 0) = 3.0;
  target.at(1, 0, 0) = 1.0;
  pred.at(0, 0, 0) = 100.0;
  const std::vector<uint8_t> valid{0, 0, 1, 0};
  MseResult r = MaskedMseLoss(pred, target, valid);
  EXPECT_DOUBLE_EQ(r.loss, 4.0);
  EXPECT_DOUBLE_EQ(r.grad.at(1, 0, 0), 4.0);
  EXPECT_EQ(r.grad.at(0, 0, 0), 0.0);
}

TEST(MseLossTest, EmptySupervisionIsAnError) {
  Tensor a(2, 2, 1);
  const std::vector<uint8_t> valid(4, 0);
  try {
    MaskedMseLoss(a, a, valid);
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("empty supervision"), std::string::npos);
  }
}

TEST(MseLossTest, GradientMatchesFiniteDifferences) {
  std::mt19937_64 rng(6);
  Tensor pred = RandomTensor(5, 5, 1, rng);
  Tensor target = RandomTensor(5, 5, 1, rng);
  std::vector<uint8_t> valid(25, 1);
  valid[3] = valid[17] = 0;
  MseResult r = MaskedMseLoss(pred, target, valid);
  const double h = 1e-3;
  for (size_t i = 0; i < pred.size(); ++i) {
    Tensor p = pred, m = pred;
    p.data()[i] += h;
    m.data()[i] -= h;
    const double fd = (MaskedMseLoss(p, target, valid).loss -
                       MaskedMseLoss(m, target, valid).loss) / (2 * h);
    const double an = r.grad.data()[i];
    EXPECT_LE(std::abs(an - fd) / std::max({std::abs(an), std::abs(fd), 1e-8}), 1e-4);
  }
}

TEST(GaussianNllTest, ZeroResidualAndUnitResidual) {
  Tensor mean(3, 3, 1, 2.0), log_var(3, 3, 1, 0.0), target(3, 3, 1, 2.0);
  const double ln2pi = std::log(2.0 * std::numbers::pi);
  EXPECT_NEAR(GaussianNllLoss(mean, log_var, target).loss, 0.5 * ln2pi, 1e-15);
  Tensor shifted(3, 3, 1, 3.0);
  EXPECT_NEAR(GaussianNllLoss(mean, log_var, shifted).loss, 0.5 * (1.0 + ln2pi), 1e-15);
}

TEST(GaussianNllTest, EmptySupervisionIsAnError) {
  Tensor a(2, 2, 1);
  const std::vector<uint8_t> valid(4, 0);
  EXPECT_THROW(GaussianNllLoss(a, a, a, valid), Error);
}

TEST(GaussianNllTest, GradientsMatchFiniteDifferences) {
  std::mt19937_64 rng(7);
  Tensor mean = RandomTensor(4, 4, 1, rng);
  Tensor log_var = RandomTensor(4, 4, 1, rng);
  Tensor target = RandomTensor(4, 4, 1, rng);
  NllResult r = GaussianNllLoss(mean, log_var, target);
  const double h = 1e-3;
  auto rel = [](double a, double b) {
    return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-8});
  };
  for (size_t i = 0; i < mean.size(); ++i) {
    Tensor p = mean, m = mean;
    p.data()[i] += h;
    m.data()[i] -= h;
    const double fd_mean = (GaussianNllLoss(p, log_var, target).loss -
                            GaussianNllLoss(m, log_var, target).loss) / (2 * h);
    EXPECT_LE(rel(r.grad_mean.data()[i], fd_mean), 1e-4);
    Tensor lp = log_var, lm = log_var;
    lp.data()[i] += h;
    lm.data()[i] -= h;
    const double fd_lv = (GaussianNllLoss(mean, lp, target).loss -
                          GaussianNllLoss(mean, lm, target).loss) / (2 * h);
    EXPECT_LE(rel(r.grad_log_var.data()[i], fd_lv), 1e-4);
  }
}

TEST(GaussianNllTest, UnitVarianceMeanGradientIsProportionalToMse) {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 20; ++trial) {
    Tensor mean = RandomTensor(3, 4, 1, rng);
    Tensor target = RandomTensor(3, 4, 1, rng);
    Tensor zero(3, 4, 1, 0.0);
    NllResult nll = GaussianNllLoss(mean, zero, target);
    MseResult mse = MaskedMseLoss(mean, target);
    for (size_t i = 0; i < mean.size(); ++i) {
      EXPECT_NEAR(mse.grad.data()[i], 2.0 * nll.grad_mean.data()[i], 1e-12);
    }
  }
}

TEST(BackwardTest, ZeroUpstreamGradientGivesZeroGradients) {
  Model model(CarbonModelSpec(4, 3, true));
  model.Initialize(1);
  std::mt19937_64 rng(9);
  Tensor x = RandomTensor(6, 6, 1, rng, 0.0, 1.0);
  ForwardCache cache;
  Tensor y = model.Forward(x, Padding::kReflect, &cache);
  std::vector<double> grads(model.param_count(), 0.0);
  model.Backward(cache, Tensor(y.rows(), y.cols(), y.channels(), 0.0), grads);
  for (double g : grads) EXPECT_EQ(g, 0.0);
}

TEST(BackwardTest, LinearOneByOneWeightGradientIsInput) {
  ModelSpec spec;
  spec.input_channels = 1;
  spec.layers = {{LayerKind::kConv, 1, 1, Activation::kIdentity}};
  Model model(spec);
  model.Initialize(1);
  Tensor x(1, 1, 1, 3.75);
  ForwardCache cache;
  model.Forward(x, Padding::kReflect, &cache);
  std::vector<double> grads(model.param_count(), 0.0);
  model.Backward(cache, Tensor(1, 1, 1, 1.0), grads);
  ASSERT_EQ(grads.size(), 2u);
  EXPECT_DOUBLE_EQ(grads[0], 3.75);
  EXPECT_DOUBLE_EQ(grads[1], 1.0);
}

TEST(BackwardTest, WithoutCachedForwardIsAnError) {
  Model model(CanopyModelSpec(2, 4, 1));
  model.Initialize(1);
  std::vector<double> grads(model.param_count(), 0.0);
  EXPECT_THROW(model.Backward(ForwardCache{}, Tensor(3, 3, 1), grads), Error);
}

TEST(BackwardTest, PowerLawParameterGradients) {
  ModelSpec spec;
  spec.input_channels = 1;
  spec.layers = {{LayerKind::kPowerLaw, 1, 1, Activation::kIdentity}};
  Model model(spec);
  model.Initialize(1);
  model.params()[0] = 1.7;
  model.params()[1] = 1.2;
  Tensor x(1, 1, 1, 20.0);
  ForwardCache cache;
  Tensor y = model.Forward(x, Padding::kReflect, &cache);
  EXPECT_NEAR(y.at(0, 0, 0), 1.7 * std::pow(20.0, 1.2), 1e-9);
  std::vector<double> grads(2, 0.0);
  model.Backward(cache, Tensor(1, 1, 1, 1.0), grads);
  EXPECT_NEAR(grads[0], std::pow(20.0, 1.2), 1e-9);
  EXPECT_NEAR(grads[1], 1.7 * std::pow(20.0, 1.2) * std::log(20.0), 1e-9);
}

TEST(GradCheckTest, LinearModelUnderMseIsExact) {
  ModelSpec spec;
  spec.input_channels = 2;
  spec.layers = {{LayerKind::kConv, 1, 1, Activation::kIdentity}};
  Model model(spec);
  model.Initialize(3);
  std::mt19937_64 rng(10);
  Tensor x = RandomTensor(4, 4, 2, rng);
  Tensor t = RandomTensor(4, 4, 1, rng);
  EXPECT_LT(GradCheck(model, x, t, LossKind::kMse).max_rel_error, 1e-6);
}

TEST(GradCheckTest, TwoLayerReluModel) {
  ModelSpec spec;
  spec.input_channels = 2;
  spec.layers = {{LayerKind::kConv, 3, 4, Activation::kRelu},
                 {LayerKind::kConv, 3, 1, Activation::kIdentity}};
  Model model(spec);
  model.Initialize(4);
  std::mt19937_64 rng(11);
  Tensor x = RandomTensor(6, 6, 2, rng);
  Tensor t = RandomTensor(6, 6, 1, rng);
  for (Padding p : {Padding::kReflect, Padding::kValid}) {
    Tensor target = p == Padding::kValid ? CropBorder(t, 2) : t;
    GradCheckResult r = GradCheck(model, x, target, LossKind::kMse, p);
    EXPECT_LT(r.max_rel_error, 1e-4);
    EXPECT_GT(r.checked, model.param_count() / 2);
  }
}

TEST(GradCheckTest, PowerLawCarbonModelUnderNll) {
  Model model(CarbonModelSpec(3, 2, true));
  model.Initialize(5);
  std::mt19937_64 rng(12);
  Tensor x = RandomTensor(6, 6, 1, rng, 0.5, 3.0);
  Tensor t = RandomTensor(6, 6, 1, rng);
  EXPECT_LT(GradCheck(model, x, t, LossKind::kGaussianNll).max_rel_error, 1e-4);
}

TEST(GradCheckTest, StandardSuitePasses) {
  const auto cases = RunStandardGradChecks();
  ASSERT_GE(cases.size(), 5u);
  for (const auto& c : cases) {
    EXPECT_LT(c.result.max_rel_error, 1e-4) << c.name;
    EXPECT_GT(c.result.checked, 0u) << c.name;
  }
}

// Independent ADAM: textbook formulas written out for a scalar.
std::vector<double> ReferenceAdamTrajectory(double w, int steps, double lr) {
  double m = 0.0, v = 0.0;
  std::vector<double> out;
  for (int t = 1; t <= steps; ++t) {
    const double g = 2.0 * w;
    m = 0.9 * m + 0.1 * g;
    v = 0.999 * v + 0.001 * g * g;
    const double mhat = m / (1.0 - std::pow(0.9, t));
    const double vhat = v / (1.0 - std::pow(0.999, t));
    w -= lr * mhat / (std::sqrt(vhat) + 1e-8);
    out.push_back(w);
  }
  return out;
}

TEST(AdamTest, ZeroGradientLeavesParametersUnchanged) {
  AdamState adam(3);
  std::vector<double> p{1.0, -2.0, 0.5};
  const std::vector<double> before = p;
  const std::vector<double> g(3, 0.0);
  for (int i = 0; i < 5; ++i) adam.Step(p, g);
  EXPECT_EQ(p, before);
  EXPECT_EQ(adam.step_count(), 5);
}

TEST(AdamTest, FirstStepHandValue) {
  AdamState adam(1);
  std::vector<double> p{0.0};
  const std::vector<double> g{1.0};
  adam.Step(p, g);
  // m_hat = 0.1 / 0.1 = 1, v_hat = 0.001 / 0.001 = 1.
  EXPECT_NEAR(p[0], -1e-4 * 1.0 / (1.0 + 1e-8), 1e-18);
  EXPECT_EQ(adam.step_count(), 1);
}

TEST(AdamTest, HundredStepsMatchReferenceTrajectory) {
  for (double lr : {1e-4, 1e-2}) {
    AdamState adam(1, AdamConfig{lr});
    std::vector<double> w{1.0};
    const auto ref = ReferenceAdamTrajectory(1.0, 100, lr);
    for (int t = 0; t < 100; ++t) {
      const std::vector<double> g{2.0 * w[0]};
      adam.Step(w, g);
      ASSERT_NEAR(w[0], ref[t], 1e-6) << "step " << t + 1;
    }
  }
}

TEST(AdamTest, NonFiniteGradientDiverges) {
  AdamState adam(2);
  std::vector<double> p{1.0, 1.0};
  const std::vector<double> g{0.5, std::nan("")};
  try {
    adam.Step(p, g);
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("diverged"), std::string::npos);
  }
  EXPECT_EQ(adam.step_count(), 0);
  EXPECT_EQ(p[0], 1.0);
}

TEST(ModelTest, ReceptiveFieldRules) {
  EXPECT_EQ(CarbonModelSpec(32, 7, false).ReceptiveField(), 15);
  EXPECT_EQ(CarbonModelSpec(32, 7, true).ReceptiveField(), 15);
  EXPECT_TRUE(CarbonModelSpec(32, 7, false).HasVarianceHead());
  for (int blocks : {1, 3, 8}) {
    const ModelSpec s = CanopyModelSpec(12, 8, blocks);
    EXPECT_EQ(s.ReceptiveField(), 1 + 2 * s.ThreeByThreeLayers());
    EXPECT_EQ(s.ReceptiveField(), 1 + 2 * (1 + 2 * blocks));
    EXPECT_EQ(s.OutputChannels(), 1);
  }
}

TEST(ModelTest, TranslationShiftsInteriorOutput) {
  Model model(CanopyModelSpec(3, 4, 1));
  model.Initialize(13);
  std::mt19937_64 rng(14);
  Tensor x = RandomTensor(16, 16, 3, rng);
  Tensor shifted(16, 16, 3);
  for (int r = 0; r < 16; ++r) {
    for (int c = 0; c < 16; ++c) {
      for (int k = 0; k < 3; ++k) shifted.at(r, c, k) = x.at(r, (c + 1) % 16, k);
    }
  }
  Tensor a = model.Forward(x, Padding::kReflect);
  Tensor b = model.Forward(shifted, Padding::kReflect);
  const int halo = (model.spec().ReceptiveField() - 1) / 2;
  for (int r = halo; r < 16 - halo; ++r) {
    for (int c = halo; c < 15 - halo - 1; ++c) {
      EXPECT_NEAR(b.at(r, c, 0), a.at(r, c + 1, 0), 1e-5);
    }
  }
}

TEST(ModelTest, ForwardIsDeterministic) {
  Model a(CanopyModelSpec(2, 4, 2));
  Model b(CanopyModelSpec(2, 4, 2));
  a.Initialize(21);
  b.Initialize(21);
  ASSERT_TRUE(std::equal(a.params().begin(), a.params().end(), b.params().begin()));
  std::mt19937_64 rng(15);
  Tensor x = RandomTensor(9, 9, 2, rng);
  Tensor t = RandomTensor(9, 9, 1, rng);
  AdamState sa(a.param_count()), sb(b.param_count());
  for (int step = 0; step < 5; ++step) {
    const auto ga = AnalyticGradient(a, x, t, LossKind::kMse, Padding::kReflect);
    const auto gb = AnalyticGradient(b, x, t, LossKind::kMse, Padding::kReflect);
    sa.Step(a.params(), ga);
    sb.Step(b.params(), gb);
  }
  EXPECT_TRUE(std::equal(a.params().begin(), a.params().end(), b.params().begin()));
}

TEST(Nnp1Test, RoundTripIsByteExact) {
  Checkpoint ckpt;
  ckpt.model = Model(CarbonModelSpec(4, 3, true));
  ckpt.model.Initialize(31);
  ckpt.model.RoundToFloat();
  ckpt.model.input_norm = {{1.5}, {2.0}};
  ckpt.model.target_norm = {{10.0}, {3.0}};
  ckpt.optimizer_steps = 1234;
  ckpt.metadata = {{"seed", 31}};
  const std::string bytes = EncodeNnp1(ckpt);
  EXPECT_EQ(bytes.substr(0, 4), "NNP1");
  Checkpoint back = DecodeNnp1(bytes);
  EXPECT_EQ(back.model.spec(), ckpt.model.spec());
  EXPECT_TRUE(std::equal(back.model.params().begin(), back.model.params().end(),
                         ckpt.model.params().begin()));
  EXPECT_EQ(back.model.input_norm, ckpt.model.input_norm);
  EXPECT_EQ(back.optimizer_steps, 1234);
  EXPECT_EQ(EncodeNnp1(back), bytes);
}

TEST(Nnp1Test, CorruptInputIsAnError) {
  Checkpoint ckpt;
  ckpt.model = Model(CanopyModelSpec(2, 4, 1));
  ckpt.model.Initialize(1);
  std::string bytes = EncodeNnp1(ckpt);
  EXPECT_THROW(DecodeNnp1(bytes.substr(0, bytes.size() - 4)), Error);
  bytes[0] = 'X';
  EXPECT_THROW(DecodeNnp1(bytes), Error);
}

}  // namespace
}  // namespace hcs
