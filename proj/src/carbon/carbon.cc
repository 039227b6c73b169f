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

#include "carbon/carbon.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include "common/error.h"
#include "common/io_util.h"
#include "common/parallel.h"
#include "common/seed.h"
#include "grid/patch.h"
#include "grid/tiles.h"
#include "nn/adam.h"
#include "nn/losses.h"

namespace hcs {
namespace {

struct TrainWindow {
  Tensor input;   // (h + 2 halo) x (w + 2 halo) x 1
  Tensor target;  // h x w x 1, normalised
  std::vector<uint8_t> valid;
};

bool Supervised(const Grid& height, const Grid& ref, const Grid* mask, int r, int c) {
  if (height.nodata(r, c) || ref.nodata(r, c)) return false;
  return !(mask && !mask->nodata(r, c) && mask->at(0, r, c) != 0.0f);
}

}  // namespace

bool PixelRect::Overlaps(const PixelRect& o) const {
  if (empty() || o.empty()) return false;
  return col0 < o.col0 + o.width && o.col0 < col0 + width && row0 < o.row0 + o.height &&
         o.row0 < row0 + height;
}

nlohmann::json ToJson(const PixelRect& r) {
  return {{"col0", r.col0}, {"row0", r.row0}, {"width", r.width}, {"height", r.height}};
}

PixelRect PixelRectFromJson(const nlohmann::json& j) {
  return {j.at("col0").get<int>(), j.at("row0").get<int>(), j.at("width").get<int>(),
          j.at("height").get<int>()};
}

RegionSplit ColumnSplit(int width, int height, double test_fraction,
                        double val_fraction) {
  Require(width >= 3 && height >= 1, "grid too small to split");
  Require(test_fraction > 0.0 && test_fraction < 1.0, "test_fraction must lie in (0, 1)");
  Require(val_fraction >= 0.0 && val_fraction < 1.0, "val_fraction must lie in [0, 1)");
  const int test_cols = std::clamp(static_cast<int>(std::lround(test_fraction * width)), 1, width - 1);
  const int rest = width - test_cols;
  const int val_cols = val_fraction > 0.0
                           ? std::clamp(static_cast<int>(std::lround(val_fraction * rest)), 1, rest - 1)
                           : 0;
  RegionSplit s;
  s.train = {0, 0, rest - val_cols, height};
  s.val = {rest - val_cols, 0, val_cols, height};
  s.test = {rest, 0, test_cols, height};
  return s;
}

void ValidateSplit(const RegionSplit& s, int width, int height) {
  Require(!s.train.empty() && !s.test.empty(), "training and test regions must be non-empty");
  const PixelRect all{0, 0, width, height};
  for (const PixelRect* r : {&s.train, &s.val, &s.test}) {
    if (r->empty()) continue;
    Require(r->col0 >= 0 && r->row0 >= 0 && r->col0 + r->width <= all.width &&
                r->row0 + r->height <= all.height,
            "region outside the grid");
  }
  if (s.train.Overlaps(s.test) || s.train.Overlaps(s.val) || s.val.Overlaps(s.test)) {
    Fail(ErrorCode::kInvalidArgument, "training, validation and test regions overlap");
  }
}

nlohmann::json ToJson(const CarbonConfig& c) {
  return {{"window", c.window},
          {"epochs", c.epochs},
          {"learning_rate", c.learning_rate},
          {"width", c.width},
          {"conv_layers", c.conv_layers},
          {"power_law", c.power_law},
          {"test_fraction", c.test_fraction},
          {"val_fraction", c.val_fraction},
          {"seeds", c.seeds},
          {"threads", c.threads}};
}

CarbonConfig CarbonConfigFromJson(const nlohmann::json& j) {
  CarbonConfig c;
  auto get = [&](const char* key, auto& field) {
    if (j.contains(key)) field = j.at(key).get<std::decay_t<decltype(field)>>();
  };
  get("window", c.window);
  get("epochs", c.epochs);
  get("learning_rate", c.learning_rate);
  get("width", c.width);
  get("conv_layers", c.conv_layers);
  get("power_law", c.power_law);
  get("test_fraction", c.test_fraction);
  get("val_fraction", c.val_fraction);
  get("seeds", c.seeds);
  get("threads", c.threads);
  return c;
}

void Validate(const CarbonConfig& c) {
  Require(c.window > 0 && c.epochs >= 0 && c.learning_rate > 0.0,
          "window and learning_rate must be positive");
  Require(c.width > 0 && c.conv_layers > 0, "invalid carbon architecture");
  Require(static_cast<int>(c.seeds.size()) == kEnsembleSize, "the ensemble needs exactly ",
          kEnsembleSize, " seeds");
}

Checkpoint TrainCarbonMember(const Grid& height, const Grid& carbon_ref,
                             const RegionSplit& split, uint64_t seed,
                             const CarbonConfig& cfg, const Grid* loss_mask,
                             std::vector<EpochRecord>* trace) {
  Validate(cfg);
  Require(height.bands() == 1 && carbon_ref.bands() == 1, "height and carbon grids need one band");
  RequireAligned(height, carbon_ref, "carbon reference");
  if (loss_mask) RequireAligned(height, *loss_mask, "loss mask");
  ValidateSplit(split, height.width(), height.height());

  const PixelRect& tr = split.train;
  // Normalisation from the supervised training pixels. Inputs are only
  // scaled so that a leading power-law layer sees non-negative heights.
  double hsq = 0.0, csum = 0.0, csq = 0.0;
  int64_t n = 0;
  for (int r = tr.row0; r < tr.row0 + tr.height; ++r) {
    for (int c = tr.col0; c < tr.col0 + tr.width; ++c) {
      if (!Supervised(height, carbon_ref, loss_mask, r, c)) continue;
      const double h = height.at(0, r, c), y = carbon_ref.at(0, r, c);
      hsq += h * h;
      csum += y;
      csq += y * y;
      ++n;
    }
  }
  Require(n > 0, "training region has no supervised pixels");
  const double hrms = std::sqrt(hsq / n);
  const double cmean = csum / n;
  const double cstd = std::sqrt(std::max(0.0, csq / n - cmean * cmean));

  Model model(CarbonModelSpec(cfg.width, cfg.conv_layers, cfg.power_law));
  model.Initialize(DeriveSeed(seed, 11));
  model.input_norm = {{0.0}, {hrms > 1e-12 ? hrms : 1.0}};
  model.target_norm = {{cmean}, {cstd > 1e-12 ? cstd : 1.0}};
  const int halo = (model.spec().ReceptiveField() - 1) / 2;

  const Grid h_train = CropGrid(height, tr.col0, tr.row0, tr.width, tr.height);
  std::vector<TrainWindow> windows;
  for (const TileWindow& w : IterateTiles(tr.width, tr.height, cfg.window, 0)) {
    TrainWindow tw;
    tw.input = ExtractWindow(h_train, w.col0 - halo, w.row0 - halo, w.width + 2 * halo,
                             w.height + 2 * halo);
    model.NormalizeInput(tw.input);
    tw.target = Tensor(w.height, w.width, 1);
    tw.valid.assign(static_cast<size_t>(w.width) * w.height, 0);
    bool any = false;
    for (int r = 0; r < w.height; ++r) {
      for (int c = 0; c < w.width; ++c) {
        const int gr = tr.row0 + w.row0 + r, gc = tr.col0 + w.col0 + c;
        if (!Supervised(height, carbon_ref, loss_mask, gr, gc)) continue;
        tw.target.at(r, c, 0) = (carbon_ref.at(0, gr, gc) - cmean) / model.target_norm.scale[0];
        tw.valid[static_cast<size_t>(r) * w.width + c] = 1;
        any = true;
      }
    }
    if (any) windows.push_back(std::move(tw));
  }

  AdamState adam(model.param_count(), {.learning_rate = cfg.learning_rate});
  std::mt19937_64 rng(DeriveSeed(seed, 12));
  std::vector<size_t> order(windows.size());
  std::iota(order.begin(), order.end(), 0);
  std::vector<double> grads(model.param_count());
  ForwardCache cache;

  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double loss_sum = 0.0;
    for (size_t k : order) {
      const TrainWindow& tw = windows[k];
      const Tensor out = model.Forward(tw.input, Padding::kValid, &cache);
      Tensor mean(out.rows(), out.cols(), 1), log_var(out.rows(), out.cols(), 1);
      for (size_t i = 0; i < mean.size(); ++i) {
        mean.data()[i] = out.data()[2 * i];
        log_var.data()[i] = out.data()[2 * i + 1];
      }
      const NllResult nll = GaussianNllLoss(mean, log_var, tw.target, tw.valid);
      if (!std::isfinite(nll.loss)) {
        Fail(ErrorCode::kRuntime, "diverged in epoch ", epoch);
      }
      Tensor grad_out(out.rows(), out.cols(), 2);
      for (size_t i = 0; i < mean.size(); ++i) {
        grad_out.data()[2 * i] = nll.grad_mean.data()[i];
        grad_out.data()[2 * i + 1] = nll.grad_log_var.data()[i];
      }
      std::fill(grads.begin(), grads.end(), 0.0);
      model.Backward(cache, grad_out, grads);
      adam.Step(model.params(), grads);
      model.ProjectConstraints();
      loss_sum += nll.loss;
    }
    if (trace) {
      EpochRecord rec;
      rec.epoch = epoch;
      rec.train_loss = windows.empty() ? 0.0 : loss_sum / windows.size();
      rec.val_rmse = std::numeric_limits<double>::quiet_NaN();
      if (!split.val.empty()) {
        const PixelRect& v = split.val;
        const Grid pred = PredictMember(model, CropGrid(height, v.col0, v.row0, v.width, v.height),
                                        {.tile = 128, .overlap = halo, .threads = 1});
        double sq = 0.0;
        int64_t count = 0;
        for (int r = 0; r < v.height; ++r) {
          for (int c = 0; c < v.width; ++c) {
            if (!Supervised(height, carbon_ref, loss_mask, v.row0 + r, v.col0 + c)) continue;
            const double d = std::max(0.0, static_cast<double>(pred.at(0, r, c))) -
                             carbon_ref.at(0, v.row0 + r, v.col0 + c);
            sq += d * d;
            ++count;
          }
        }
        if (count > 0) rec.val_rmse = std::sqrt(sq / count);
      }
      trace->push_back(rec);
    }
  }

  model.RoundToFloat();
  Checkpoint ck;
  ck.model = std::move(model);
  ck.optimizer_steps = adam.step_count();
  ck.metadata = {{"stage", "carbon"},
                 {"seed", seed},
                 {"epochs", cfg.epochs},
                 {"windows_per_epoch", windows.size()},
                 {"train_region", ToJson(split.train)}};
  return ck;
}

CarbonEnsemble TrainCarbonEnsemble(const Grid& height, const Grid& carbon_ref,
                                   const RegionSplit& split, const CarbonConfig& cfg,
                                   const Grid* loss_mask,
                                   std::vector<std::vector<EpochRecord>>* traces) {
  Validate(cfg);
  ValidateSplit(split, height.width(), height.height());
  CarbonEnsemble e;
  e.seeds = cfg.seeds;
  e.members.resize(kEnsembleSize);
  std::vector<std::vector<EpochRecord>> local(kEnsembleSize);
  ParallelFor(kEnsembleSize, cfg.threads, [&](size_t i) {
    e.members[i] = TrainCarbonMember(height, carbon_ref, split, cfg.seeds[i], cfg, loss_mask,
                                     traces ? &local[i] : nullptr);
  });
  if (traces) *traces = std::move(local);
  e.config = ToJson(cfg);
  e.config["split"] = {{"train", ToJson(split.train)},
                       {"val", ToJson(split.val)},
                       {"test", ToJson(split.test)}};
  return e;
}

Grid PredictMember(const Model& model, const Grid& height, const DenseOptions& options) {
  Require(model.spec().HasVarianceHead(), "carbon member needs mean and log-variance heads");
  const Grid raw = DenseInference(model, height, options);
  Grid out(height.width(), height.height(), 2, height.transform());
  out.band_names() = {"carbon_mean", "carbon_variance"};
  out.nodata_mask() = raw.nodata_mask();
  // An unset target normalisation is the identity.
  const auto& norm = model.target_norm;
  const double shift = norm.shift.empty() ? 0.0 : norm.shift[0];
  const double scale = norm.scale.empty() ? 1.0 : norm.scale[0];
  for (size_t i = 0; i < out.pixel_count(); ++i) {
    out.band(0)[i] = static_cast<float>(raw.band(0)[i] * scale + shift);
    out.band(1)[i] = static_cast<float>(std::exp(static_cast<double>(raw.band(1)[i])) * scale * scale);
  }
  return out;
}

CarbonPrediction PredictCarbon(const CarbonEnsemble& ensemble, const Grid& height,
                               const DenseOptions& options) {
  if (ensemble.members.size() != static_cast<size_t>(kEnsembleSize)) {
    Fail(ErrorCode::kInvalidArgument, "ensemble must have exactly ", kEnsembleSize,
         " members, got ", ensemble.members.size());
  }
  std::vector<Grid> outputs(kEnsembleSize);
  DenseOptions inner = options;
  inner.threads = 1;
  ParallelFor(kEnsembleSize, options.threads, [&](size_t i) {
    outputs[i] = PredictMember(ensemble.members[i].model, height, inner);
  });
  CarbonPrediction p{Grid(height.width(), height.height(), 1, height.transform()),
                     Grid(height.width(), height.height(), 1, height.transform())};
  p.mean.band_names() = {"carbon_density"};
  p.variance.band_names() = {"carbon_variance"};
  p.mean.nodata_mask() = height.nodata_mask();
  p.variance.nodata_mask() = height.nodata_mask();
  for (size_t i = 0; i < height.pixel_count(); ++i) {
    double sum = 0.0, var_sum = 0.0;
    for (const Grid& o : outputs) {
      sum += o.band(0)[i];
      var_sum += o.band(1)[i];
    }
    const double mean = sum / kEnsembleSize;
    double spread = 0.0;
    for (const Grid& o : outputs) spread += (o.band(0)[i] - mean) * (o.band(0)[i] - mean);
    p.mean.values()[i] = static_cast<float>(std::max(0.0, mean));
    p.variance.values()[i] = static_cast<float>(var_sum / kEnsembleSize + spread / kEnsembleSize);
  }
  return p;
}

CarbonEvalReport EvaluateCarbon(const CarbonPrediction& pred, const Grid& carbon_ref,
                                const PixelRect& test_region) {
  RequireAligned(pred.mean, carbon_ref, "carbon reference");
  Require(!test_region.empty(), "empty test region");
  Require(test_region.col0 >= 0 && test_region.row0 >= 0 &&
              test_region.col0 + test_region.width <= carbon_ref.width() &&
              test_region.row0 + test_region.height <= carbon_ref.height(),
          "test region outside the reference coverage");
  std::vector<double> p, r;
  for (int row = test_region.row0; row < test_region.row0 + test_region.height; ++row) {
    for (int col = test_region.col0; col < test_region.col0 + test_region.width; ++col) {
      if (pred.mean.nodata(row, col) || carbon_ref.nodata(row, col)) continue;
      p.push_back(pred.mean.at(0, row, col));
      r.push_back(carbon_ref.at(0, row, col));
    }
  }
  Require(!p.empty(), "empty test region");
  CarbonEvalReport report;
  report.metrics = ComputeRegressionMetrics(p, r);

  std::vector<size_t> order(p.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](size_t a, size_t b) { return r[a] < r[b]; });
  const size_t n = order.size();
  for (int d = 0; d < 10; ++d) {
    const size_t lo = n * d / 10, hi = n * (d + 1) / 10;
    if (hi <= lo) continue;
    DecileRow row;
    row.decile = d + 1;
    row.ref_min = r[order[lo]];
    row.ref_max = r[order[hi - 1]];
    double ps = 0.0, rs = 0.0;
    for (size_t k = lo; k < hi; ++k) {
      ps += p[order[k]];
      rs += r[order[k]];
    }
    row.count = static_cast<int64_t>(hi - lo);
    row.pred_mean = ps / row.count;
    row.ref_mean = rs / row.count;
    report.deciles.push_back(row);
  }
  if (report.deciles.size() >= 3) {
    const DecileRow& first = report.deciles.front();
    const DecileRow& top = report.deciles.back();
    const DecileRow& below = report.deciles[report.deciles.size() - 2];
    const double overall = (top.pred_mean - first.pred_mean) / (top.ref_mean - first.ref_mean);
    const double top_slope = (top.pred_mean - below.pred_mean) / (top.ref_mean - below.ref_mean);
    if (std::isfinite(overall) && std::isfinite(top_slope) && overall > 0.0) {
      report.saturation_ratio = top_slope / overall;
      report.saturated = report.saturation_ratio < kSaturationRatio;
    }
  }
  return report;
}

nlohmann::json ToJson(const CarbonEvalReport& report) {
  nlohmann::json deciles = nlohmann::json::array();
  for (const auto& d : report.deciles) {
    deciles.push_back({{"decile", d.decile},
                       {"ref_min", d.ref_min},
                       {"ref_max", d.ref_max},
                       {"ref_mean", d.ref_mean},
                       {"pred_mean", d.pred_mean},
                       {"count", d.count}});
  }
  return {{"rmse", report.metrics.rmse},
          {"mae", report.metrics.mae},
          {"me", report.metrics.me},
          {"count", report.metrics.count},
          {"deciles", deciles},
          {"saturation_ratio", report.saturation_ratio},
          {"saturated", report.saturated}};
}

void WriteEnsemble(const std::filesystem::path& dir, const CarbonEnsemble& e) {
  Require(e.members.size() == static_cast<size_t>(kEnsembleSize), "ensemble must have ",
          kEnsembleSize, " members");
  std::filesystem::create_directories(dir);
  nlohmann::json members = nlohmann::json::array();
  for (int i = 0; i < kEnsembleSize; ++i) {
    const std::string name = "member_" + std::to_string(i) + ".nnp1";
    const std::string bytes = EncodeNnp1(e.members[i]);
    WriteFileAtomic(dir / name, bytes);
    members.push_back({{"file", name},
                       {"seed", i < static_cast<int>(e.seeds.size()) ? e.seeds[i] : 0},
                       {"sha256", Sha256Hex(bytes)}});
  }
  const std::string cfg = e.config.dump();
  nlohmann::json manifest = {{"format", "carbon-ensemble"},
                             {"members", members},
                             {"config", e.config},
                             {"config_sha256", Sha256Hex(cfg)}};
  WriteFileAtomic(dir / "ensemble.json", manifest.dump(2) + "\n");
}

CarbonEnsemble ReadEnsemble(const std::filesystem::path& dir) {
  nlohmann::json manifest;
  try {
    manifest = nlohmann::json::parse(ReadFileBytes(dir / "ensemble.json"));
  } catch (const nlohmann::json::exception& ex) {
    Fail(ErrorCode::kIo, "bad ensemble manifest: ", ex.what());
  }
  CarbonEnsemble e;
  e.config = manifest.value("config", nlohmann::json::object());
  for (const auto& m : manifest.at("members")) {
    e.members.push_back(ReadNnp1(dir / m.at("file").get<std::string>()));
    e.seeds.push_back(m.value("seed", uint64_t{0}));
  }
  if (e.members.size() != static_cast<size_t>(kEnsembleSize)) {
    Fail(ErrorCode::kInvalidArgument, "ensemble must have exactly ", kEnsembleSize,
         " members, got ", e.members.size());
  }
  return e;
}

}  // namespace hcs
