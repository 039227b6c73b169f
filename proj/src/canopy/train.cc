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

#include "canopy/train.h"

#include <algorithm>
#include <cmath>
#include <random>

#include "common/error.h"
#include "common/parallel.h"
#include "common/seed.h"
#include "nn/adam.h"
#include "nn/losses.h"

namespace hcs {
namespace {

Normalization FitInputNorm(const Dataset& ds, const std::vector<size_t>& idx) {
  const int half = ds.patch_size / 2;
  std::vector<double> sum(ds.bands, 0.0), sq(ds.bands, 0.0);
  for (size_t i : idx) {
    const float* px = ds.patch(i).data() +
                      (static_cast<size_t>(half) * ds.patch_size + half) * ds.bands;
    for (int b = 0; b < ds.bands; ++b) {
      sum[b] += px[b];
      sq[b] += static_cast<double>(px[b]) * px[b];
    }
  }
  Normalization n;
  for (int b = 0; b < ds.bands; ++b) {
    const double mean = sum[b] / idx.size();
    const double var = std::max(0.0, sq[b] / idx.size() - mean * mean);
    n.shift.push_back(mean);
    n.scale.push_back(var > 1e-12 ? std::sqrt(var) : 1.0);
  }
  return n;
}

Normalization FitTargetNorm(const Dataset& ds, const std::vector<size_t>& idx) {
  double sum = 0.0, sq = 0.0;
  for (size_t i : idx) {
    sum += ds.records[i].canopy_top_height;
    sq += static_cast<double>(ds.records[i].canopy_top_height) *
          ds.records[i].canopy_top_height;
  }
  const double mean = sum / idx.size();
  const double var = std::max(0.0, sq / idx.size() - mean * mean);
  return {{mean}, {var > 1e-12 ? std::sqrt(var) : 1.0}};
}

double ValidationRmse(const Model& model, const Dataset& ds,
                      const std::vector<size_t>& idx, int threads) {
  const auto pred = PredictRecords(model, ds, idx, threads);
  double sq = 0.0;
  for (size_t k = 0; k < idx.size(); ++k) {
    const double d = pred[k] - ds.records[idx[k]].canopy_top_height;
    sq += d * d;
  }
  return std::sqrt(sq / idx.size());
}

}  // namespace

std::vector<size_t> RecordsInTiles(const Dataset& ds, const std::vector<int>& tiles,
                                   const FootprintSource* source) {
  std::vector<size_t> out;
  for (size_t i = 0; i < ds.records.size(); ++i) {
    const auto& r = ds.records[i];
    if (source && r.source != *source) continue;
    if (std::binary_search(tiles.begin(), tiles.end(), r.tile_id)) out.push_back(i);
  }
  return out;
}

std::vector<double> PredictRecords(const Model& model, const Dataset& ds,
                                   const std::vector<size_t>& indices,
                                   int threads) {
  const int rf = model.spec().ReceptiveField();
  std::vector<double> out(indices.size());
  ParallelFor(indices.size(), threads, [&](size_t k) {
    Tensor x = ds.CenterCrop(indices[k], rf);
    model.NormalizeInput(x);
    const Tensor y = model.Forward(x, Padding::kValid);
    const double h = y.data()[0] * model.target_norm.scale[0] + model.target_norm.shift[0];
    out[k] = std::max(0.0, h);
  });
  return out;
}

CanopyTrainResult TrainCanopy(const Dataset& ds, const TrainConfig& cfg) {
  return TrainCanopy(ds, cfg, SplitTiles(ds.tiles, cfg.holdout_fraction, cfg.seed));
}

CanopyTrainResult TrainCanopy(const Dataset& ds, const TrainConfig& cfg,
                              const TileSplit& split) {
  Validate(cfg);
  Require(ds.patch_size >= cfg.patch_size && ds.bands > 0,
          "dataset has no patches of the configured size");
  std::vector<int> train_tiles = split.train, val_tiles = split.val;
  std::sort(train_tiles.begin(), train_tiles.end());
  std::sort(val_tiles.begin(), val_tiles.end());
  const auto train_idx = RecordsInTiles(ds, train_tiles);
  Require(!train_idx.empty(), "empty training set");
  const FootprintSource lidar = FootprintSource::kLidarFootprint;
  auto val_idx = RecordsInTiles(ds, val_tiles, &lidar);
  if (val_idx.empty()) val_idx = RecordsInTiles(ds, val_tiles);
  if (val_idx.empty()) val_idx = train_idx;

  CanopyTrainResult result;
  result.split = {train_tiles, val_tiles};
  Model model(CanopyModelSpec(ds.bands, cfg.width, cfg.blocks));
  model.Initialize(DeriveSeed(cfg.seed, 1));
  model.input_norm = FitInputNorm(ds, train_idx);
  model.target_norm = FitTargetNorm(ds, train_idx);
  const int rf = model.spec().ReceptiveField();
  const double tshift = model.target_norm.shift[0], tscale = model.target_norm.scale[0];

  AdamState adam(model.param_count(), {.learning_rate = cfg.learning_rate});
  std::mt19937_64 rng(DeriveSeed(cfg.seed, 2));
  std::uniform_int_distribution<size_t> pick(0, train_idx.size() - 1);
  const int batch = cfg.batch_size;
  std::vector<ForwardCache> caches(batch);
  std::vector<std::vector<double>> sample_grads(batch,
                                                std::vector<double>(model.param_count()));
  std::vector<double> grads(model.param_count());
  std::vector<size_t> chosen(batch);
  Tensor pred(batch, 1, 1), target(batch, 1, 1);

  std::vector<double> best = {model.params().begin(), model.params().end()};
  result.best_val_rmse = ValidationRmse(model, ds, val_idx, cfg.threads);
  double loss_sum = 0.0;
  int loss_count = 0;

  for (int it = 0; it < cfg.iterations; ++it) {
    for (int b = 0; b < batch; ++b) chosen[b] = train_idx[pick(rng)];
    ParallelFor(batch, cfg.threads, [&](size_t b) {
      Tensor x = ds.CenterCrop(chosen[b], rf);
      model.NormalizeInput(x);
      pred.data()[b] = model.Forward(x, Padding::kValid, &caches[b]).data()[0];
      target.data()[b] = (ds.records[chosen[b]].canopy_top_height - tshift) / tscale;
    });
    const MseResult mse = MaskedMseLoss(pred, target);
    if (!std::isfinite(mse.loss)) {
      result.diverged = true;
      result.message = "diverged at iteration " + std::to_string(it + 1);
      break;
    }
    ParallelFor(batch, cfg.threads, [&](size_t b) {
      std::fill(sample_grads[b].begin(), sample_grads[b].end(), 0.0);
      model.Backward(caches[b], Tensor(1, 1, 1, mse.grad.data()[b]), sample_grads[b]);
    });
    std::fill(grads.begin(), grads.end(), 0.0);
    for (int b = 0; b < batch; ++b) {
      for (size_t p = 0; p < grads.size(); ++p) grads[p] += sample_grads[b][p];
    }
    try {
      adam.Step(model.params(), grads);
    } catch (const Error&) {
      result.diverged = true;
      result.message = "diverged at iteration " + std::to_string(it + 1);
      break;
    }
    model.ProjectConstraints();
    loss_sum += mse.loss * tscale * tscale;
    ++loss_count;

    const int done = it + 1;
    if (done == 1 || done % cfg.eval_every == 0 || done == cfg.iterations) {
      const double rmse = ValidationRmse(model, ds, val_idx, cfg.threads);
      result.trace.push_back({done, loss_sum / loss_count, rmse});
      loss_sum = 0.0;
      loss_count = 0;
      if (rmse < result.best_val_rmse) {
        result.best_val_rmse = rmse;
        result.best_iteration = done;
        best.assign(model.params().begin(), model.params().end());
      }
    }
  }

  std::copy(best.begin(), best.end(), model.params().begin());
  model.RoundToFloat();
  result.checkpoint.model = std::move(model);
  result.checkpoint.optimizer_steps = adam.step_count();
  result.checkpoint.metadata = {{"stage", "canopy"},
                                {"train_config", ToJson(cfg)},
                                {"best_iteration", result.best_iteration},
                                {"best_val_rmse", result.best_val_rmse},
                                {"train_tiles", train_tiles},
                                {"val_tiles", val_tiles}};
  return result;
}

nlohmann::json TraceToJson(const std::vector<TraceEntry>& trace) {
  nlohmann::json j = nlohmann::json::array();
  for (const auto& e : trace) {
    j.push_back({{"iteration", e.iteration},
                 {"train_loss", e.train_loss},
                 {"val_rmse", e.val_rmse}});
  }
  return j;
}

}  // namespace hcs
