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

#include "evalstats/evalstats.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <map>
#include <numeric>

#include "common/error.h"

namespace hcs {

std::string FormatNumber(double v) {
  if (std::isnan(v)) return "nan";
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

RegressionMetrics ComputeRegressionMetrics(std::span<const double> pred,
                                           std::span<const double> ref,
                                           std::span<const uint8_t> valid) {
  Require(pred.size() == ref.size(), "prediction and reference differ in length");
  Require(valid.empty() || valid.size() == pred.size(), "mask length mismatch");
  double sum = 0.0, abs_sum = 0.0, sq = 0.0;
  int64_t n = 0;
  for (size_t i = 0; i < pred.size(); ++i) {
    if (!valid.empty() && !valid[i]) continue;
    const double d = pred[i] - ref[i];
    sum += d;
    abs_sum += std::abs(d);
    sq += d * d;
    ++n;
  }
  Require(n > 0, "no valid pixels to evaluate");
  RegressionMetrics m;
  m.count = n;
  m.me = sum / n;
  m.mae = abs_sum / n;
  m.mse = sq / n;
  m.rmse = std::sqrt(m.mse);
  return m;
}

RegressionMetrics ComputeRegressionMetrics(const Grid& pred, const Grid& ref) {
  RequireAligned(pred, ref, "reference");
  std::vector<double> p(pred.band(0).begin(), pred.band(0).end());
  std::vector<double> r(ref.band(0).begin(), ref.band(0).end());
  std::vector<uint8_t> valid(p.size());
  for (size_t i = 0; i < p.size(); ++i) {
    valid[i] = !pred.nodata_mask()[i] && !ref.nodata_mask()[i];
  }
  return ComputeRegressionMetrics(p, r, valid);
}

ConfusionMatrix ComputeConfusion(std::span<const int> pred, std::span<const int> ref,
                                 std::span<const int> labels,
                                 std::span<const std::string> names) {
  Require(pred.size() == ref.size(), "class lists differ in length");
  Require(!labels.empty(), "empty label list");
  std::map<int, size_t> index;
  for (size_t i = 0; i < labels.size(); ++i) index[labels[i]] = i;
  Require(index.size() == labels.size(), "duplicate labels");
  const size_t k = labels.size();
  ConfusionMatrix m;
  m.labels.assign(labels.begin(), labels.end());
  for (size_t i = 0; i < k; ++i) {
    m.names.push_back(i < names.size() ? names[i] : std::to_string(labels[i]));
  }
  m.counts.assign(k, std::vector<int64_t>(k, 0));
  auto lookup = [&](int v) {
    auto it = index.find(v);
    if (it == index.end()) Fail(ErrorCode::kInvalidArgument, "unknown label ", v);
    return it->second;
  };
  for (size_t i = 0; i < pred.size(); ++i) ++m.counts[lookup(ref[i])][lookup(pred[i])];
  int64_t diag = 0;
  m.row_normalized.assign(k, std::vector<double>(k, 0.0));
  for (size_t r = 0; r < k; ++r) {
    const int64_t row = std::accumulate(m.counts[r].begin(), m.counts[r].end(), int64_t{0});
    m.total += row;
    diag += m.counts[r][r];
    if (row == 0) continue;
    for (size_t c = 0; c < k; ++c) {
      m.row_normalized[r][c] = static_cast<double>(m.counts[r][c]) / row;
    }
  }
  m.overall_accuracy = m.total > 0 ? static_cast<double>(diag) / m.total : 0.0;
  return m;
}

namespace {

template <typename Map>
ConfusionMatrix ClassConfusion(const Grid& pred, const Grid& ref, Map map,
                               std::vector<int> labels,
                               std::vector<std::string> names) {
  RequireAligned(pred, ref, "reference classes");
  std::vector<int> p, r;
  for (size_t i = 0; i < pred.pixel_count(); ++i) {
    if (pred.nodata_mask()[i] || ref.nodata_mask()[i]) continue;
    const int a = static_cast<int>(pred.values()[i]);
    const int b = static_cast<int>(ref.values()[i]);
    if (a >= kCarbonClassCount || b >= kCarbonClassCount) continue;
    p.push_back(map(a));
    r.push_back(map(b));
  }
  return ComputeConfusion(p, r, labels, names);
}

}  // namespace

ConfusionMatrix CarbonClassConfusion(const Grid& pred_classes, const Grid& ref_classes) {
  std::vector<int> labels;
  std::vector<std::string> names;
  for (int k = 0; k < kCarbonClassCount; ++k) {
    labels.push_back(k);
    names.emplace_back(ClassName(static_cast<HcsClass>(k)));
  }
  return ClassConfusion(pred_classes, ref_classes, [](int c) { return c; }, labels, names);
}

ConfusionMatrix BinaryConfusion(const Grid& pred_classes, const Grid& ref_classes) {
  return ClassConfusion(
      pred_classes, ref_classes,
      [](int c) { return static_cast<int>(BinaryCollapse(static_cast<HcsClass>(c))); },
      {static_cast<int>(BinaryClass::kOls), static_cast<int>(BinaryClass::kHcs)},
      {"OLS", "HCS"});
}

double Percentile(std::span<const double> sorted, double p) {
  Require(!sorted.empty(), "percentile of an empty sample");
  Require(p >= 0.0 && p <= 1.0, "percentile rank outside [0, 1]");
  const double pos = p * (sorted.size() - 1);
  const size_t lo = static_cast<size_t>(std::floor(pos));
  const size_t hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - lo;
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

BoxplotSummary Summarize(std::vector<double> values) {
  Require(!values.empty(), "empty group");
  std::sort(values.begin(), values.end());
  BoxplotSummary s;
  s.count = static_cast<int64_t>(values.size());
  s.p10 = Percentile(values, 0.10);
  s.q1 = Percentile(values, 0.25);
  s.median = Percentile(values, 0.50);
  s.q3 = Percentile(values, 0.75);
  s.p90 = Percentile(values, 0.90);
  return s;
}

BoxplotResult GroupedBoxplot(std::span<const double> values,
                             std::span<const int> groups,
                             std::span<const int> group_order,
                             std::span<const std::string> names) {
  Require(values.size() == groups.size(), "values and groups differ in length");
  std::map<int, std::vector<double>> by_group;
  for (size_t i = 0; i < values.size(); ++i) by_group[groups[i]].push_back(values[i]);
  BoxplotResult out;
  for (size_t k = 0; k < group_order.size(); ++k) {
    const int g = group_order[k];
    const std::string name = k < names.size() ? names[k] : std::to_string(g);
    auto it = by_group.find(g);
    if (it == by_group.end() || it->second.empty()) {
      out.notes.push_back("group " + name + " has no values; omitted");
      continue;
    }
    BoxplotSummary s = Summarize(it->second);
    s.group = g;
    s.name = name;
    out.groups.push_back(s);
  }
  return out;
}

std::vector<ZoneStats> ComputeZonalStats(const Grid& class_grid, const Grid& zone_grid,
                                         bool rank_by_hcs) {
  RequireAligned(class_grid, zone_grid, "zone grid");
  const double pixel_ha = std::pow(class_grid.transform().pixel_size, 2) / 1e4;
  std::map<int, ZoneStats> zones;
  for (size_t i = 0; i < class_grid.pixel_count(); ++i) {
    if (zone_grid.nodata_mask()[i]) continue;
    const int zone = static_cast<int>(zone_grid.values()[i]);
    ZoneStats& z = zones[zone];
    if (z.class_counts.empty()) {
      z.zone_id = zone;
      z.class_counts.assign(kHcsClassCount, 0);
    }
    if (class_grid.nodata_mask()[i]) continue;
    const int c = static_cast<int>(class_grid.values()[i]);
    Require(c >= 0 && c < kHcsClassCount, "invalid class code ", c);
    if (c == static_cast<int>(HcsClass::kNoData)) continue;
    ++z.class_counts[c];
    ++z.count;
  }
  std::vector<ZoneStats> out;
  for (auto& [id, z] : zones) {
    z.area_ha = z.count * pixel_ha;
    z.class_fractions.assign(kHcsClassCount, 0.0);
    if (z.count > 0) {
      for (int c = 0; c < kHcsClassCount; ++c) {
        z.class_fractions[c] = static_cast<double>(z.class_counts[c]) / z.count;
      }
      int64_t hcs = 0, ols = 0, plant = 0;
      for (int c = 0; c < kHcsClassCount; ++c) {
        const HcsClass k = static_cast<HcsClass>(c);
        const BinaryClass b = BinaryCollapse(k);
        if (b == BinaryClass::kHcs) hcs += z.class_counts[c];
        if (b == BinaryClass::kOls) ols += z.class_counts[c];
        if (k == HcsClass::kPlantationOilPalm || k == HcsClass::kPlantationCoconut) {
          plant += z.class_counts[c];
        }
      }
      z.hcs_fraction = static_cast<double>(hcs) / z.count;
      z.ols_fraction = static_cast<double>(ols) / z.count;
      z.plantation_fraction = static_cast<double>(plant) / z.count;
    }
    out.push_back(std::move(z));
  }
  if (rank_by_hcs) {
    std::stable_sort(out.begin(), out.end(), [](const ZoneStats& a, const ZoneStats& b) {
      return a.hcs_fraction > b.hcs_fraction;
    });
  }
  return out;
}

std::string MetricsCsv(const std::vector<std::pair<std::string, RegressionMetrics>>& rows) {
  std::string out = "quantity,count,rmse,mae,me,mse\n";
  for (const auto& [name, m] : rows) {
    out += name + "," + std::to_string(m.count) + "," + FormatNumber(m.rmse) + "," +
           FormatNumber(m.mae) + "," + FormatNumber(m.me) + "," + FormatNumber(m.mse) + "\n";
  }
  return out;
}

nlohmann::json MetricsJson(const std::vector<std::pair<std::string, RegressionMetrics>>& rows) {
  nlohmann::json j = nlohmann::json::array();
  for (const auto& [name, m] : rows) {
    j.push_back({{"quantity", name},
                 {"count", m.count},
                 {"rmse", m.rmse},
                 {"mae", m.mae},
                 {"me", m.me},
                 {"mse", m.mse}});
  }
  return j;
}

std::string ConfusionCsv(const std::vector<std::pair<std::string, ConfusionMatrix>>& mats) {
  std::string out = "matrix,reference,prediction,count,row_fraction\n";
  for (const auto& [name, m] : mats) {
    for (size_t r = 0; r < m.labels.size(); ++r) {
      for (size_t c = 0; c < m.labels.size(); ++c) {
        out += name + "," + m.names[r] + "," + m.names[c] + "," +
               std::to_string(m.counts[r][c]) + "," + FormatNumber(m.row_normalized[r][c]) +
               "\n";
      }
    }
  }
  return out;
}

nlohmann::json ConfusionJson(const std::vector<std::pair<std::string, ConfusionMatrix>>& mats) {
  nlohmann::json j = nlohmann::json::array();
  for (const auto& [name, m] : mats) {
    j.push_back({{"matrix", name},
                 {"labels", m.names},
                 {"counts", m.counts},
                 {"row_normalized", m.row_normalized},
                 {"total", m.total},
                 {"overall_accuracy", m.overall_accuracy}});
  }
  return j;
}

std::string BoxplotCsv(const BoxplotResult& result) {
  std::string out = "group,count,p10,q1,median,q3,p90\n";
  for (const auto& g : result.groups) {
    out += g.name + "," + std::to_string(g.count) + "," + FormatNumber(g.p10) + "," +
           FormatNumber(g.q1) + "," + FormatNumber(g.median) + "," + FormatNumber(g.q3) +
           "," + FormatNumber(g.p90) + "\n";
  }
  return out;
}

nlohmann::json BoxplotJson(const BoxplotResult& result) {
  nlohmann::json groups = nlohmann::json::array();
  for (const auto& g : result.groups) {
    groups.push_back({{"group", g.name},
                      {"count", g.count},
                      {"p10", g.p10},
                      {"q1", g.q1},
                      {"median", g.median},
                      {"q3", g.q3},
                      {"p90", g.p90}});
  }
  return {{"percentile_rule", "linear interpolation at p*(n-1)"},
          {"groups", groups},
          {"notes", result.notes}};
}

std::string ZonesCsv(const std::vector<ZoneStats>& zones) {
  std::string out = "zone,count,area_ha";
  for (int c = 0; c < kHcsClassCount; ++c) {
    if (c == static_cast<int>(HcsClass::kNoData)) continue;
    out += ",";
    out += ClassName(static_cast<HcsClass>(c));
  }
  out += ",HCS,OLS,Plantations\n";
  for (const auto& z : zones) {
    out += std::to_string(z.zone_id) + "," + std::to_string(z.count) + "," +
           FormatNumber(z.area_ha);
    for (int c = 0; c < kHcsClassCount; ++c) {
      if (c == static_cast<int>(HcsClass::kNoData)) continue;
      out += "," + FormatNumber(z.class_fractions[c]);
    }
    out += "," + FormatNumber(z.hcs_fraction) + "," + FormatNumber(z.ols_fraction) + "," +
           FormatNumber(z.plantation_fraction) + "\n";
  }
  return out;
}

nlohmann::json ZonesJson(const std::vector<ZoneStats>& zones) {
  nlohmann::json j = nlohmann::json::array();
  for (const auto& z : zones) {
    nlohmann::json fractions = nlohmann::json::object();
    for (int c = 0; c < kHcsClassCount; ++c) {
      if (c == static_cast<int>(HcsClass::kNoData)) continue;
      fractions[std::string(ClassName(static_cast<HcsClass>(c)))] = z.class_fractions[c];
    }
    j.push_back({{"zone", z.zone_id},
                 {"count", z.count},
                 {"area_ha", z.area_ha},
                 {"fractions", fractions},
                 {"HCS", z.hcs_fraction},
                 {"OLS", z.ols_fraction},
                 {"Plantations", z.plantation_fraction}});
  }
  return j;
}

}  // namespace hcs
