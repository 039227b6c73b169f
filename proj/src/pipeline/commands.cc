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

#include "pipeline/commands.h"

#include <algorithm>
#include <array>
#include <cmath>
#include <map>

#include "canopy/predict.h"
#include "canopy/train.h"
#include "common/error.h"
#include "common/io_util.h"
#include "common/version.h"
#include "evalstats/evalstats.h"
#include "grid/grd_io.h"
#include "grid/resample.h"
#include "nn/grad_check.h"

namespace hcs {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

constexpr std::array<std::string_view, 10> kCommands = {
    "synth",          "train-canopy", "predict",  "composite", "train-carbon",
    "predict-carbon", "classify",     "stats",    "eval",      "grad-check"};

// Tracks what a command reads and writes and emits its manifest.
class Stage {
 public:
  Stage(const PipelineConfig& cfg, std::string_view command, fs::path dir)
      : cfg_(cfg), command_(command), dir_(std::move(dir)) {
    fs::create_directories(dir_);
  }

  const fs::path& dir() const { return dir_; }

  std::string Read(const fs::path& path) {
    std::string bytes = ReadFileBytes(path);
    inputs_[Label(path)] = Sha256Hex(bytes);
    return bytes;
  }
  Grid ReadGrid(const fs::path& path, json* attributes = nullptr) {
    return DecodeGrd1(Read(path), attributes);
  }
  Checkpoint ReadModel(const fs::path& path) { return DecodeNnp1(Read(path)); }
  Dataset ReadDataset(const fs::path& path) { return DecodeFpd1(Read(path)); }
  json ReadJson(const fs::path& path) {
    try {
      return json::parse(Read(path));
    } catch (const json::exception& e) {
      Fail(ErrorCode::kIo, "bad JSON in ", path.string(), ": ", e.what());
    }
  }

  void Write(const std::string& name, std::string_view bytes) {
    const fs::path path = dir_ / name;
    WriteFileAtomic(path, bytes);
    outputs_[Label(path)] = Sha256Hex(bytes);
  }
  void WriteGrid(const std::string& name, const Grid& grid, const json& attributes = nullptr) {
    Write(name, EncodeGrd1(grid, attributes));
  }
  void WriteJson(const std::string& name, const json& j) { Write(name, j.dump(2) + "\n"); }
  // For writers that produce the file themselves.
  void Record(const std::string& name) {
    const fs::path path = dir_ / name;
    outputs_[Label(path)] = Sha256File(path);
  }

  void Finish(const json& extra = json::object()) {
    json manifest = {{"command", command_},
                     {"version", kVersion},
                     {"seed", cfg_.seed},
                     {"threads", cfg_.threads},
                     {"config_sha256", Sha256Hex(SerializePipelineConfig(cfg_))},
                     {"config", ToJson(cfg_)},
                     {"inputs", inputs_},
                     {"outputs", outputs_}};
    if (!extra.empty()) manifest["details"] = extra;
    WriteFileAtomic(dir_ / "manifest.json", manifest.dump(2) + "\n");
  }

 private:
  std::string Label(const fs::path& path) const {
    const fs::path rel = path.lexically_normal().lexically_relative(
        fs::path(cfg_.output_dir).lexically_normal());
    if (rel.empty() || rel.string().starts_with("..")) return path.lexically_normal().string();
    return rel.generic_string();
  }

  const PipelineConfig& cfg_;
  std::string command_;
  fs::path dir_;
  std::map<std::string, std::string> inputs_;
  std::map<std::string, std::string> outputs_;
};

fs::path Out(const PipelineConfig& cfg, const char* stage) {
  return fs::path(cfg.output_dir) / stage;
}

std::string ImageName(int i) { return "image_" + std::to_string(i) + ".grd1"; }
std::string CloudName(int i) { return "cloud_" + std::to_string(i) + ".grd1"; }
std::string HeightName(int i) { return "height_" + std::to_string(i) + ".grd1"; }

json RunSynth(const PipelineConfig& cfg) {
  Stage st(cfg, "synth", WorldDir(cfg));
  const WorldConfig& wc = cfg.synth.world;
  const World world = GenerateWorld(wc);
  const auto acquisitions = GenerateImages(world.height, wc, cfg.synth.acquisitions);
  const auto footprints = GenerateFootprints(world.height, wc);
  const Overlays overlays = GenerateOverlays(wc);
  const int factor = static_cast<int>(std::lround(cfg.synth.reference_pixel_size / wc.pixel_size));
  Require(factor >= 1 && std::abs(factor * wc.pixel_size - cfg.synth.reference_pixel_size) < 1e-9,
          "reference_pixel_size must be a multiple of the pixel size");
  const Grid ref_coarse = BlockAverage(world.carbon, factor);
  // Partial coarse blocks can overhang the world; keep the world's extent.
  Grid ref = CropGrid(BilinearResample(ref_coarse, wc.pixel_size), 0, 0, wc.extent, wc.extent);
  ref.band_names() = {"carbon_reference"};
  // Edge extrapolation can dip below zero next to bare ground.
  for (float& v : ref.values()) v = std::max(v, 0.0f);

  st.WriteGrid("height.grd1", world.height);
  st.WriteGrid("carbon.grd1", world.carbon);
  st.WriteGrid("carbon_ref_coarse.grd1", ref_coarse);
  st.WriteGrid("carbon_ref.grd1", ref);
  st.WriteGrid("scene_class.grd1", world.scene_class);
  st.WriteGrid("zones.grd1", world.zones);
  st.WriteGrid("palm_density.grd1", overlays.palm_density);
  st.WriteGrid("coconut_density.grd1", overlays.coconut_density);
  st.WriteGrid("urban.grd1", overlays.urban_100m);
  for (size_t i = 0; i < acquisitions.size(); ++i) {
    st.WriteGrid(ImageName(static_cast<int>(i)), acquisitions[i].image);
    st.WriteGrid(CloudName(static_cast<int>(i)), acquisitions[i].cloud_prob);
  }
  st.Write("footprints.fpd1", EncodeFpd1(FootprintDataset(footprints)));
  WritePgm(st.dir() / "height.pgm", world.height);
  st.Record("height.pgm");
  const json info = {{"world", ToJson(wc)},
                     {"acquisitions", cfg.synth.acquisitions},
                     {"tile_size", wc.tile_size},
                     {"footprint_count", footprints.size()},
                     {"noise_floor",
                      {{"canopy_height_m", wc.label_noise_sd},
                       {"carbon_mg_c_per_ha", wc.carbon_noise_sd}}}};
  st.WriteJson("world.json", info);
  st.Finish();
  return info;
}

json RunTrainCanopy(const PipelineConfig& cfg) {
  Stage st(cfg, "train-canopy", Out(cfg, "canopy"));
  const fs::path wd = WorldDir(cfg);
  const json info = st.ReadJson(wd / "world.json");
  const int tile = info.at("tile_size").get<int>();
  const int count = info.at("acquisitions").get<int>();
  const Grid scl = st.ReadGrid(wd / "scene_class.grd1");
  const Dataset raw = st.ReadDataset(wd / "footprints.fpd1");

  std::vector<TileInput> tiles;
  for (int a = 0; a < count; ++a) {
    const Grid image = st.ReadGrid(wd / ImageName(a));
    const Grid cloud = st.ReadGrid(wd / CloudName(a));
    RequireAligned(image, scl, "scene class");
    for (int r0 = 0; r0 < image.height(); r0 += tile) {
      for (int c0 = 0; c0 < image.width(); c0 += tile) {
        const int w = std::min(tile, image.width() - c0), h = std::min(tile, image.height() - r0);
        tiles.push_back({TileIdOf(c0, r0, image.width(), tile), CropGrid(image, c0, r0, w, h),
                         CropGrid(cloud, c0, r0, w, h), CropGrid(scl, c0, r0, w, h)});
      }
    }
  }
  const Dataset ds = BuildDataset(tiles, raw.records, cfg.canopy.train);
  st.Write("dataset.fpd1", EncodeFpd1(ds));
  CanopyTrainResult result = TrainCanopy(ds, cfg.canopy.train);
  const json summary = {{"records", ds.size()},
                        {"lidar_records", ds.CountSource(FootprintSource::kLidarFootprint)},
                        {"forced_zero_records", ds.CountSource(FootprintSource::kForcedZero)},
                        {"dropped_cloudy", ds.dropped_cloudy},
                        {"skipped_outside", ds.skipped_outside},
                        {"best_iteration", result.best_iteration},
                        {"best_val_rmse", result.best_val_rmse},
                        {"train_tiles", result.split.train},
                        {"val_tiles", result.split.val},
                        {"diverged", result.diverged}};
  st.WriteJson("trace.json", {{"trace", TraceToJson(result.trace)}, {"summary", summary}});
  if (result.diverged) {
    st.Finish(summary);
    Fail(ErrorCode::kRuntime, "canopy training ", result.message);
  }
  st.Write("model.nnp1", EncodeNnp1(result.checkpoint));
  st.Finish(summary);
  return summary;
}

DenseOptions CanopyDense(const PipelineConfig& cfg) {
  return {.tile = cfg.canopy.tile, .overlap = cfg.canopy.overlap, .threads = cfg.threads};
}

json RunPredict(const PipelineConfig& cfg) {
  Stage st(cfg, "predict", Out(cfg, "predict"));
  const fs::path wd = WorldDir(cfg);
  const int count = st.ReadJson(wd / "world.json").at("acquisitions").get<int>();
  const Checkpoint ck = st.ReadModel(Out(cfg, "canopy") / "model.nnp1");
  std::vector<Grid> clouds;
  for (int a = 0; a < count; ++a) clouds.push_back(st.ReadGrid(wd / CloudName(a)));
  const size_t k = std::min<size_t>(cfg.canopy.composite_images, clouds.size());
  const auto chosen = SelectLeastCloudy(clouds, k);
  json selection = json::array();
  for (size_t idx : chosen) {
    const Grid image = st.ReadGrid(wd / ImageName(static_cast<int>(idx)));
    const Grid height = PredictDense(ck.model, image, CanopyDense(cfg));
    st.WriteGrid(HeightName(static_cast<int>(idx)), height);
    selection.push_back({{"acquisition", idx},
                         {"mean_cloud_probability", MeanCloudProbability(clouds[idx])},
                         {"prediction", HeightName(static_cast<int>(idx))}});
  }
  const json summary = {{"selected", selection}};
  st.WriteJson("selection.json", summary);
  st.Finish();
  return summary;
}

json RunComposite(const PipelineConfig& cfg) {
  Stage st(cfg, "composite", Out(cfg, "composite"));
  const json sel = st.ReadJson(Out(cfg, "predict") / "selection.json");
  std::vector<Grid> preds, clouds;
  for (const auto& s : sel.at("selected")) {
    const int idx = s.at("acquisition").get<int>();
    preds.push_back(st.ReadGrid(Out(cfg, "predict") / HeightName(idx)));
    clouds.push_back(st.ReadGrid(WorldDir(cfg) / CloudName(idx)));
  }
  const Grid composite = Composite(preds, clouds);
  st.WriteGrid("canopy_height.grd1", composite);
  WritePgm(st.dir() / "canopy_height.pgm", composite);
  st.Record("canopy_height.pgm");
  const json summary = {{"images", preds.size()},
                        {"valid_pixels", composite.valid_count()},
                        {"nodata_pixels", composite.pixel_count() - composite.valid_count()}};
  st.Finish(summary);
  return summary;
}

// 1 where the plantation or urban overlays apply; such pixels carry no loss.
Grid OverlayMask(Stage& st, const PipelineConfig& cfg, const Grid& like) {
  const fs::path wd = WorldDir(cfg);
  const Grid palm = st.ReadGrid(wd / "palm_density.grd1");
  const Grid coconut = st.ReadGrid(wd / "coconut_density.grd1");
  const Grid urban = NearestOnto(st.ReadGrid(wd / "urban.grd1"), like);
  Grid zero(like.width(), like.height(), 1, like.transform());
  const Grid over = Overlay(zero, palm, coconut, urban, cfg.overlay);
  Grid mask(like.width(), like.height(), 1, like.transform());
  mask.band_names() = {"loss_mask"};
  for (size_t i = 0; i < mask.pixel_count(); ++i) {
    mask.values()[i] = over.values()[i] != 0.0f ? 1.0f : 0.0f;
  }
  return mask;
}

json RunTrainCarbon(const PipelineConfig& cfg) {
  Stage st(cfg, "train-carbon", Out(cfg, "carbon"));
  const Grid height = st.ReadGrid(Out(cfg, "composite") / "canopy_height.grd1");
  const Grid ref = st.ReadGrid(WorldDir(cfg) / "carbon_ref.grd1");
  const Grid mask = OverlayMask(st, cfg, height);
  const RegionSplit split = ColumnSplit(height.width(), height.height(),
                                        cfg.carbon.test_fraction, cfg.carbon.val_fraction);
  std::vector<std::vector<EpochRecord>> traces;
  const CarbonEnsemble ensemble =
      TrainCarbonEnsemble(height, ref, split, cfg.carbon, &mask, &traces);
  WriteEnsemble(st.dir(), ensemble);
  for (int i = 0; i < kEnsembleSize; ++i) st.Record("member_" + std::to_string(i) + ".nnp1");
  st.Record("ensemble.json");
  json trace = json::array();
  for (size_t m = 0; m < traces.size(); ++m) {
    json rows = json::array();
    for (const auto& r : traces[m]) {
      rows.push_back({{"epoch", r.epoch},
                      {"train_loss", r.train_loss},
                      {"val_rmse", std::isfinite(r.val_rmse) ? json(r.val_rmse) : json(nullptr)}});
    }
    trace.push_back({{"seed", ensemble.seeds[m]}, {"epochs", rows}});
  }
  st.WriteJson("trace.json", trace);
  const json summary = {{"members", kEnsembleSize},
                        {"seeds", ensemble.seeds},
                        {"train", ToJson(split.train)},
                        {"val", ToJson(split.val)},
                        {"test", ToJson(split.test)}};
  st.Finish(summary);
  return summary;
}

json RunPredictCarbon(const PipelineConfig& cfg) {
  Stage st(cfg, "predict-carbon", Out(cfg, "carbon_pred"));
  const fs::path edir = Out(cfg, "carbon");
  st.Read(edir / "ensemble.json");
  for (int i = 0; i < kEnsembleSize; ++i) st.Read(edir / ("member_" + std::to_string(i) + ".nnp1"));
  const CarbonEnsemble ensemble = ReadEnsemble(edir);
  const Grid height = st.ReadGrid(Out(cfg, "composite") / "canopy_height.grd1");
  const int halo = (ensemble.members.front().model.spec().ReceptiveField() - 1) / 2;
  const CarbonPrediction pred =
      PredictCarbon(ensemble, height,
                    {.tile = cfg.canopy.tile, .overlap = std::max(cfg.canopy.overlap, halo),
                     .threads = cfg.threads});
  st.WriteGrid("carbon_mean.grd1", pred.mean);
  st.WriteGrid("carbon_variance.grd1", pred.variance);
  WritePgm(st.dir() / "carbon_mean.pgm", pred.mean);
  st.Record("carbon_mean.pgm");
  const json summary = {{"valid_pixels", pred.mean.valid_count()}};
  st.Finish(summary);
  return summary;
}

json RunClassify(const PipelineConfig& cfg) {
  Stage st(cfg, "classify", Out(cfg, "classify"));
  const fs::path wd = WorldDir(cfg);
  const Grid mean = st.ReadGrid(Out(cfg, "carbon_pred") / "carbon_mean.grd1");
  const Grid ref = st.ReadGrid(wd / "carbon_ref.grd1");
  const Grid palm = st.ReadGrid(wd / "palm_density.grd1");
  const Grid coconut = st.ReadGrid(wd / "coconut_density.grd1");
  const Grid urban = NearestOnto(st.ReadGrid(wd / "urban.grd1"), mean);
  const json legend = ClassLegend(cfg.thresholds);
  const Grid classes =
      Overlay(ClassifyCarbonGrid(mean, cfg.thresholds), palm, coconut, urban, cfg.overlay);
  const Grid ref_classes =
      Overlay(ClassifyCarbonGrid(ref, cfg.thresholds), palm, coconut, urban, cfg.overlay);
  st.WriteGrid("hcs_classes.grd1", classes, {{"legend", legend}});
  st.WriteGrid("reference_classes.grd1", ref_classes, {{"legend", legend}});
  st.WriteJson("legend.json", legend);
  WritePpm(st.dir() / "hcs_classes.ppm", classes, ClassPalette());
  st.Record("hcs_classes.ppm");
  std::vector<int64_t> counts(kHcsClassCount, 0);
  for (float v : classes.values()) ++counts.at(static_cast<int>(v));
  json per_class = json::object();
  for (int k = 0; k < kHcsClassCount; ++k) {
    per_class[std::string(ClassName(static_cast<HcsClass>(k)))] = counts[k];
  }
  const json summary = {{"class_counts", per_class}};
  st.Finish(summary);
  return summary;
}

json RunStats(const PipelineConfig& cfg) {
  Stage st(cfg, "stats", Out(cfg, "stats"));
  const Grid classes = st.ReadGrid(Out(cfg, "classify") / "hcs_classes.grd1");
  const Grid ref_classes = st.ReadGrid(Out(cfg, "classify") / "reference_classes.grd1");
  const Grid zones = st.ReadGrid(WorldDir(cfg) / "zones.grd1");
  const Grid height = st.ReadGrid(Out(cfg, "composite") / "canopy_height.grd1");
  const auto zs = ComputeZonalStats(classes, zones, cfg.eval.rank_zones_by_hcs);
  st.Write("zones.csv", ZonesCsv(zs));
  st.WriteJson("zones.json", ZonesJson(zs));

  // Estimated canopy heights grouped by reference carbon class.
  RequireAligned(height, ref_classes, "reference classes");
  std::vector<double> values;
  std::vector<int> groups;
  for (size_t i = 0; i < height.pixel_count(); ++i) {
    if (height.nodata_mask()[i] || ref_classes.nodata_mask()[i]) continue;
    const int c = static_cast<int>(ref_classes.values()[i]);
    if (c >= kCarbonClassCount) continue;
    values.push_back(height.values()[i]);
    groups.push_back(c);
  }
  std::vector<int> order;
  std::vector<std::string> names;
  for (int k = 0; k < kCarbonClassCount; ++k) {
    order.push_back(k);
    names.emplace_back(ClassName(static_cast<HcsClass>(k)));
  }
  const BoxplotResult box = GroupedBoxplot(values, groups, order, names);
  st.Write("boxplots.csv", BoxplotCsv(box));
  st.WriteJson("boxplots.json", BoxplotJson(box));
  const json summary = {{"zones", zs.size()}, {"boxplot_groups", box.groups.size()}};
  st.Finish(summary);
  return summary;
}

Grid CropRect(const Grid& g, const PixelRect& r) {
  return CropGrid(g, r.col0, r.row0, r.width, r.height);
}

json RunEval(const PipelineConfig& cfg) {
  Stage st(cfg, "eval", Out(cfg, "eval"));
  const fs::path wd = WorldDir(cfg);
  const Grid true_height = st.ReadGrid(wd / "height.grd1");
  const Grid ref = st.ReadGrid(wd / "carbon_ref.grd1");
  const Grid composite = st.ReadGrid(Out(cfg, "composite") / "canopy_height.grd1");
  const Grid mean = st.ReadGrid(Out(cfg, "carbon_pred") / "carbon_mean.grd1");
  const Grid variance = st.ReadGrid(Out(cfg, "carbon_pred") / "carbon_variance.grd1");
  const Grid classes = st.ReadGrid(Out(cfg, "classify") / "hcs_classes.grd1");
  const Grid ref_classes = st.ReadGrid(Out(cfg, "classify") / "reference_classes.grd1");
  const json ens = st.ReadJson(Out(cfg, "carbon") / "ensemble.json");
  const PixelRect test = PixelRectFromJson(ens.at("config").at("split").at("test"));

  std::vector<std::pair<std::string, RegressionMetrics>> rows;
  rows.emplace_back("canopy_height", ComputeRegressionMetrics(composite, true_height));
  rows.emplace_back("carbon_test", ComputeRegressionMetrics(CropRect(mean, test), CropRect(ref, test)));
  st.Write("metrics.csv", MetricsCsv(rows));
  st.WriteJson("metrics.json", MetricsJson(rows));

  const Grid pc = CropRect(classes, test), rc = CropRect(ref_classes, test);
  std::vector<std::pair<std::string, ConfusionMatrix>> mats;
  mats.emplace_back("six_class", CarbonClassConfusion(pc, rc));
  mats.emplace_back("binary", BinaryConfusion(pc, rc));
  st.Write("confusion.csv", ConfusionCsv(mats));
  st.WriteJson("confusion.json", ConfusionJson(mats));

  const CarbonEvalReport report = EvaluateCarbon({mean, variance}, ref, test);
  st.WriteJson("carbon_eval.json", ToJson(report));
  const json summary = {{"canopy_rmse", rows[0].second.rmse},
                        {"carbon_test_rmse", rows[1].second.rmse},
                        {"six_class_accuracy", mats[0].second.overall_accuracy},
                        {"binary_accuracy", mats[1].second.overall_accuracy},
                        {"saturated", report.saturated}};
  st.Finish(summary);
  return summary;
}

json RunGradCheck() {
  const auto cases = RunStandardGradChecks();
  double worst = 0.0;
  json list = json::array();
  for (const auto& c : cases) {
    worst = std::max(worst, c.result.max_rel_error);
    list.push_back({{"case", c.name},
                    {"max_rel_error", c.result.max_rel_error},
                    {"checked", c.result.checked},
                    {"skipped_at_kinks", c.result.skipped_at_kinks}});
  }
  return {{"cases", list}, {"max_rel_error", worst}, {"tolerance", 1e-4}, {"passed", worst < 1e-4}};
}

}  // namespace

std::span<const std::string_view> CommandNames() { return kCommands; }

bool IsCommand(std::string_view name) {
  return std::find(kCommands.begin(), kCommands.end(), name) != kCommands.end();
}

json RunCommand(const PipelineConfig& config, std::string_view command) {
  Validate(config);
  const PipelineConfig cfg = Resolved(config);
  if (command == "synth") return RunSynth(cfg);
  if (command == "train-canopy") return RunTrainCanopy(cfg);
  if (command == "predict") return RunPredict(cfg);
  if (command == "composite") return RunComposite(cfg);
  if (command == "train-carbon") return RunTrainCarbon(cfg);
  if (command == "predict-carbon") return RunPredictCarbon(cfg);
  if (command == "classify") return RunClassify(cfg);
  if (command == "stats") return RunStats(cfg);
  if (command == "eval") return RunEval(cfg);
  if (command == "grad-check") return RunGradCheck();
  Fail(ErrorCode::kInvalidArgument, "unknown command '", command, "'");
}

}  // namespace hcs
