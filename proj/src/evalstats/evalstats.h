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

#ifndef HCSMAP_EVALSTATS_EVALSTATS_H_
#define HCSMAP_EVALSTATS_EVALSTATS_H_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "grid/grid.h"
#include "hcs/hcs.h"

namespace hcs {

struct RegressionMetrics {
  double rmse = 0.0;
  double mae = 0.0;
  double me = 0.0;   // mean(pred - ref); negative means under-prediction
  double mse = 0.0;
  int64_t count = 0;
};

// Over elements with valid[i] != 0 (all when `valid` is empty). Throws when
// nothing is valid.
RegressionMetrics ComputeRegressionMetrics(std::span<const double> pred,
                                           std::span<const double> ref,
                                           std::span<const uint8_t> valid = {});

// Over pixels valid in both single-band grids.
RegressionMetrics ComputeRegressionMetrics(const Grid& pred, const Grid& ref);

struct ConfusionMatrix {
  std::vector<int> labels;
  std::vector<std::string> names;
  std::vector<std::vector<int64_t>> counts;  // reference rows, prediction columns
  std::vector<std::vector<double>> row_normalized;
  int64_t total = 0;
  double overall_accuracy = 0.0;
};

// Throws on a value that is not among `labels`.
ConfusionMatrix ComputeConfusion(std::span<const int> pred, std::span<const int> ref,
                                 std::span<const int> labels,
                                 std::span<const std::string> names = {});

// Six carbon classes over pixels where both grids carry a carbon class.
ConfusionMatrix CarbonClassConfusion(const Grid& pred_classes, const Grid& ref_classes);
// OLS/HCS over the same pixels.
ConfusionMatrix BinaryConfusion(const Grid& pred_classes, const Grid& ref_classes);

// Linear interpolation between closest ranks: position p * (n - 1) in the
// sorted values.
double Percentile(std::span<const double> sorted, double p);

struct BoxplotSummary {
  int group = 0;
  std::string name;
  double p10 = 0.0, q1 = 0.0, median = 0.0, q3 = 0.0, p90 = 0.0;
  int64_t count = 0;
};

struct BoxplotResult {
  std::vector<BoxplotSummary> groups;
  std::vector<std::string> notes;  // omitted groups
};

BoxplotSummary Summarize(std::vector<double> values);

// Summaries in `group_order`; groups without values are omitted with a note.
BoxplotResult GroupedBoxplot(std::span<const double> values,
                             std::span<const int> groups,
                             std::span<const int> group_order,
                             std::span<const std::string> names = {});

struct ZoneStats {
  int zone_id = 0;
  int64_t count = 0;  // valid pixels
  double area_ha = 0.0;
  std::vector<int64_t> class_counts;  // by class code, NoData excluded (0)
  std::vector<double> class_fractions;
  double hcs_fraction = 0.0;
  double ols_fraction = 0.0;
  double plantation_fraction = 0.0;
};

// Per-zone class fractions. The denominator is the zone's valid pixels
// (NoData excluded). Zones are reported in ascending id, or by descending
// HCS fraction when `rank_by_hcs` is set.
std::vector<ZoneStats> ComputeZonalStats(const Grid& class_grid, const Grid& zone_grid,
                                         bool rank_by_hcs = false);

// CSV and JSON renderings with fixed headers.
std::string MetricsCsv(const std::vector<std::pair<std::string, RegressionMetrics>>& rows);
nlohmann::json MetricsJson(const std::vector<std::pair<std::string, RegressionMetrics>>& rows);
std::string ConfusionCsv(const std::vector<std::pair<std::string, ConfusionMatrix>>& mats);
nlohmann::json ConfusionJson(const std::vector<std::pair<std::string, ConfusionMatrix>>& mats);
std::string BoxplotCsv(const BoxplotResult& result);
nlohmann::json BoxplotJson(const BoxplotResult& result);
std::string ZonesCsv(const std::vector<ZoneStats>& zones);
nlohmann::json ZonesJson(const std::vector<ZoneStats>& zones);

// Shortest round-trip decimal form used in every CSV.
std::string FormatNumber(double v);

}  // namespace hcs

#endif  // HCSMAP_EVALSTATS_EVALSTATS_H_
