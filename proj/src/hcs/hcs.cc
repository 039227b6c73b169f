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

#include "hcs/hcs.h"

#include <cmath>

#include "common/error.h"

namespace hcs {
namespace {

constexpr std::array<std::string_view, kHcsClassCount> kNames = {
    "OL", "S", "YRF", "LDF", "MDF", "HDF", "PalmOil", "Coconut", "Urban", "NoData"};

constexpr std::array<std::string_view, kHcsClassCount> kDescriptions = {
    "open land",
    "scrub",
    "young regenerating forest",
    "low density forest",
    "medium density forest",
    "high density forest",
    "oil palm plantation",
    "coconut plantation",
    "urban",
    "no data"};

}  // namespace

std::string_view ClassName(HcsClass c) { return kNames.at(static_cast<int>(c)); }

std::string_view BinaryName(BinaryClass c) {
  switch (c) {
    case BinaryClass::kOls: return "OLS";
    case BinaryClass::kHcs: return "HCS";
    default: return "Other";
  }
}

void Validate(const HcsThresholds& t) {
  if (t.breakpoints.size() != kCarbonClassCount - 1) {
    Fail(ErrorCode::kConfig, "expected ", kCarbonClassCount - 1, " carbon breakpoints");
  }
  bool found = false;
  for (size_t i = 0; i < t.breakpoints.size(); ++i) {
    if (!(t.breakpoints[i] > (i == 0 ? 0.0 : t.breakpoints[i - 1]))) {
      Fail(ErrorCode::kConfig, "carbon breakpoints must be positive and strictly increasing");
    }
    found |= t.breakpoints[i] == t.hcs_cutoff;
  }
  if (!found) Fail(ErrorCode::kConfig, "hcs_cutoff must be one of the breakpoints");
}

void Validate(const OverlayThresholds& t) {
  if (!(t.oil_palm_density > 0.0 && t.coconut_density > 0.0)) {
    Fail(ErrorCode::kConfig, "overlay thresholds must be positive");
  }
}

nlohmann::json ToJson(const HcsThresholds& t) {
  return {{"breakpoints", t.breakpoints}, {"hcs_cutoff", t.hcs_cutoff}};
}

nlohmann::json ToJson(const OverlayThresholds& t) {
  return {{"oil_palm_density", t.oil_palm_density},
          {"coconut_density", t.coconut_density}};
}

HcsThresholds HcsThresholdsFromJson(const nlohmann::json& j) {
  HcsThresholds t;
  if (j.contains("breakpoints")) t.breakpoints = j.at("breakpoints").get<std::vector<double>>();
  if (j.contains("hcs_cutoff")) t.hcs_cutoff = j.at("hcs_cutoff").get<double>();
  return t;
}

OverlayThresholds OverlayThresholdsFromJson(const nlohmann::json& j) {
  OverlayThresholds t;
  if (j.contains("oil_palm_density")) t.oil_palm_density = j.at("oil_palm_density").get<double>();
  if (j.contains("coconut_density")) t.coconut_density = j.at("coconut_density").get<double>();
  return t;
}

HcsClass ClassifyCarbon(double density, const HcsThresholds& t) {
  if (!(density >= 0.0)) {
    Fail(ErrorCode::kInvalidArgument, "negative carbon density ", density);
  }
  int k = 0;
  while (k < static_cast<int>(t.breakpoints.size()) && density >= t.breakpoints[k]) ++k;
  return static_cast<HcsClass>(k);
}

BinaryClass BinaryCollapse(HcsClass c) {
  switch (c) {
    case HcsClass::kOpenLand:
    case HcsClass::kScrub:
      return BinaryClass::kOls;
    case HcsClass::kYoungRegeneratingForest:
    case HcsClass::kLowDensityForest:
    case HcsClass::kMediumDensityForest:
    case HcsClass::kHighDensityForest:
      return BinaryClass::kHcs;
    default:
      return BinaryClass::kOther;
  }
}

Grid ClassifyCarbonGrid(const Grid& carbon, const HcsThresholds& t) {
  Validate(t);
  Require(carbon.bands() >= 1, "carbon grid has no bands");
  Grid out(carbon.width(), carbon.height(), 1, carbon.transform());
  out.band_names() = {"hcs_class"};
  out.nodata_mask() = carbon.nodata_mask();
  const auto src = carbon.band(0);
  for (size_t i = 0; i < out.pixel_count(); ++i) {
    const HcsClass c = carbon.nodata_mask()[i] ? HcsClass::kNoData : ClassifyCarbon(src[i], t);
    out.values()[i] = static_cast<float>(c);
  }
  return out;
}

Grid NearestOnto(const Grid& categorical, const Grid& target) {
  Require(!categorical.empty(), "empty input");
  Grid out(target.width(), target.height(), categorical.bands(), target.transform());
  out.band_names() = categorical.band_names();
  for (int r = 0; r < target.height(); ++r) {
    for (int c = 0; c < target.width(); ++c) {
      const auto [x, y] = target.transform().PixelCenter(c, r);
      const auto [sc, sr] = categorical.transform().MapToPixelIndex(x, y);
      if (sc < 0 || sr < 0 || sc >= categorical.width() || sr >= categorical.height() ||
          categorical.nodata(sr, sc)) {
        out.set_nodata(r, c, true);
        continue;
      }
      for (int b = 0; b < categorical.bands(); ++b) out.at(b, r, c) = categorical.at(b, sr, sc);
    }
  }
  return out;
}

Grid Overlay(const Grid& classes, const Grid& palm_density,
             const Grid& coconut_density, const Grid& urban,
             const OverlayThresholds& t) {
  Validate(t);
  RequireAligned(classes, palm_density, "oil palm density");
  RequireAligned(classes, coconut_density, "coconut density");
  RequireAligned(classes, urban, "urban mask");
  Grid out = classes;
  out.band_names() = {"hcs_class"};
  for (size_t i = 0; i < out.pixel_count(); ++i) {
    // Compared at grid precision so that a stored 0.2f does not exceed 0.2.
    auto on = [&](const Grid& g, double thr) {
      return !g.nodata_mask()[i] && g.values()[i] > static_cast<float>(thr);
    };
    HcsClass c = static_cast<HcsClass>(static_cast<int>(classes.values()[i]));
    if (!urban.nodata_mask()[i] && urban.values()[i] != 0.0f) {
      c = HcsClass::kUrban;
    } else if (on(palm_density, t.oil_palm_density)) {
      c = HcsClass::kPlantationOilPalm;
    } else if (on(coconut_density, t.coconut_density)) {
      c = HcsClass::kPlantationCoconut;
    }
    out.values()[i] = static_cast<float>(c);
    out.nodata_mask()[i] = c == HcsClass::kNoData ? 1 : 0;
  }
  return out;
}

const std::array<std::array<uint8_t, 3>, kHcsClassCount>& ClassPalette() {
  static const std::array<std::array<uint8_t, 3>, kHcsClassCount> palette = {{
      {230, 220, 170},  // OL
      {190, 200, 110},  // S
      {130, 190, 90},   // YRF
      {70, 150, 60},    // LDF
      {30, 110, 40},    // MDF
      {10, 60, 20},     // HDF
      {230, 130, 40},   // oil palm
      {200, 90, 160},   // coconut
      {150, 150, 150},  // urban
      {0, 0, 0},        // nodata
  }};
  return palette;
}

nlohmann::json ClassLegend(const HcsThresholds& t) {
  Validate(t);
  nlohmann::json classes = nlohmann::json::array();
  for (int k = 0; k < kHcsClassCount; ++k) {
    const auto& rgb = ClassPalette()[k];
    nlohmann::json entry = {{"code", k},
                            {"name", kNames[k]},
                            {"description", kDescriptions[k]},
                            {"color", {rgb[0], rgb[1], rgb[2]}}};
    if (k < kCarbonClassCount) {
      entry["min_carbon"] = k == 0 ? 0.0 : t.breakpoints[k - 1];
      entry["max_carbon"] = k + 1 < kCarbonClassCount ? nlohmann::json(t.breakpoints[k])
                                                      : nlohmann::json(nullptr);
      entry["binary"] = BinaryName(BinaryCollapse(static_cast<HcsClass>(k)));
    } else {
      entry["binary"] = "Other";
    }
    classes.push_back(entry);
  }
  return {{"units", "Mg C / ha"},
          {"interval", "lower-inclusive, upper-exclusive"},
          {"hcs_cutoff", t.hcs_cutoff},
          {"classes", classes}};
}

}  // namespace hcs
