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

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "common/error.h"
#include "evalstats/evalstats.h"
#include "grid/grid.h"
#include "hcs/hcs.h"

namespace hcs {
namespace {

TEST(RegressionMetricsTest, Examples) {
  const std::vector<double> a{1.0, 2.0, 3.0};
  RegressionMetrics same = ComputeRegressionMetrics(a, a);
  EXPECT_EQ(same.rmse, 0.0);
  EXPECT_EQ(same.mae, 0.0);
  EXPECT_EQ(same.me, 0.0);
  RegressionMetrics sym = ComputeRegressionMetrics(std::vector<double>{2, 2}, std::vector<double>{1, 3});
  EXPECT_DOUBLE_EQ(sym.rmse, 1.0);
  EXPECT_DOUBLE_EQ(sym.mae, 1.0);
  EXPECT_DOUBLE_EQ(sym.me, 0.0);
  RegressionMetrics low = ComputeRegressionMetrics(std::vector<double>{0}, std::vector<double>{5});
  EXPECT_DOUBLE_EQ(low.me, -5.0);
}

TEST(RegressionMetricsTest, MaskAndEmptyInput) {
  const std::vector<double> p{1, 100, 3}, r{1, 0, 4};
  const std::vector<uint8_t> valid{1, 0, 1};
  RegressionMetrics m = ComputeRegressionMetrics(p, r, valid);
  EXPECT_EQ(m.count, 2);
  EXPECT_DOUBLE_EQ(m.me, -0.5);
  EXPECT_THROW(ComputeRegressionMetrics(p, r, std::vector<uint8_t>{0, 0, 0}), Error);
}

TEST(RegressionMetricsTest, InequalitiesOnRandomVectors) {
  std::mt19937_64 rng(1);
  std::uniform_int_distribution<int> len(1, 200);
  std::normal_distribution<double> n(0.0, 10.0);
  std::uniform_real_distribution<double> bias(-5.0, 5.0);
  for (int trial = 0; trial < 1000; ++trial) {
    const int k = len(rng);
    const double b = bias(rng);
    std::vector<double> p(k), r(k);
    for (int i = 0; i < k; ++i) {
      r[i] = n(rng);
      p[i] = r[i] + b + n(rng) * 0.3;
    }
    RegressionMetrics m = ComputeRegressionMetrics(p, r);
    ASSERT_GE(m.rmse, m.mae);
    ASSERT_GE(m.mae, std::abs(m.me) - 1e-12);
    ASSERT_NEAR(m.rmse * m.rmse, m.mse, 1e-9 * std::max(m.mse, 1e-300));
    ASSERT_EQ(m.count, k);
  }
}

TEST(ConfusionTest, Examples) {
  const std::vector<int> labels{0, 1};
  ConfusionMatrix id = ComputeConfusion(std::vector<int>{0, 1, 1}, std::vector<int>{0, 1, 1}, labels);
  EXPECT_EQ(id.overall_accuracy, 1.0);
  EXPECT_EQ(id.row_normalized[0][0], 1.0);
  EXPECT_EQ(id.row_normalized[1][0], 0.0);
  ConfusionMatrix m = ComputeConfusion(std::vector<int>{0, 1, 1, 1}, std::vector<int>{0, 0, 1, 1}, labels);
  EXPECT_EQ(m.row_normalized[0], (std::vector<double>{0.5, 0.5}));
  EXPECT_EQ(m.row_normalized[1], (std::vector<double>{0.0, 1.0}));
  EXPECT_DOUBLE_EQ(m.overall_accuracy, 0.75);
  EXPECT_EQ(m.total, 4);
  EXPECT_THROW(ComputeConfusion(std::vector<int>{2}, std::vector<int>{0}, labels), Error);
}

TEST(ConfusionTest, RowsSumToOneAndTotalsMatch) {
  std::mt19937_64 rng(2);
  std::uniform_int_distribution<int> cls(0, 5);
  const std::vector<int> labels{0, 1, 2, 3, 4, 5};
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<int> p(300), r(300);
    for (int i = 0; i < 300; ++i) {
      r[i] = cls(rng) % (1 + trial % 6);
      p[i] = cls(rng);
    }
    ConfusionMatrix m = ComputeConfusion(p, r, labels);
    ASSERT_EQ(m.total, 300);
    int64_t trace = 0;
    for (size_t i = 0; i < labels.size(); ++i) {
      trace += m.counts[i][i];
      double sum = 0.0;
      int64_t row = 0;
      for (size_t j = 0; j < labels.size(); ++j) {
        sum += m.row_normalized[i][j];
        row += m.counts[i][j];
      }
      if (row > 0) {
        ASSERT_NEAR(sum, 1.0, 1e-12);
      } else {
        ASSERT_EQ(sum, 0.0);
      }
    }
    ASSERT_DOUBLE_EQ(m.overall_accuracy, static_cast<double>(trace) / 300.0);
  }
}

TEST(ConfusionTest, BinaryCollapseCommutes) {
  std::mt19937_64 rng(3);
  std::uniform_int_distribution<int> cls(0, 5);
  Grid pred(40, 40, 1), ref(40, 40, 1);
  for (float& v : pred.values()) v = static_cast<float>(cls(rng));
  for (float& v : ref.values()) v = static_cast<float>(cls(rng));
  ConfusionMatrix six = CarbonClassConfusion(pred, ref);
  ConfusionMatrix binary = BinaryConfusion(pred, ref);
  // Sum the 6x6 blocks by hand and compare with the collapsed grids.
  auto side = [](int c) { return c < 2 ? 0 : 1; };
  int64_t collapsed[2][2] = {{0, 0}, {0, 0}};
  for (int i = 0; i < 6; ++i) {
    for (int j = 0; j < 6; ++j) collapsed[side(i)][side(j)] += six.counts[i][j];
  }
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) EXPECT_EQ(binary.counts[i][j], collapsed[i][j]);
  }
  std::vector<int> pb, rb;
  for (size_t i = 0; i < pred.pixel_count(); ++i) {
    pb.push_back(side(static_cast<int>(pred.values()[i])));
    rb.push_back(side(static_cast<int>(ref.values()[i])));
  }
  ConfusionMatrix direct = ComputeConfusion(pb, rb, std::vector<int>{0, 1});
  EXPECT_EQ(direct.counts, binary.counts);
  EXPECT_EQ(six.total, 1600);
}

TEST(ConfusionTest, OverlayAndNodataPixelsAreSkipped) {
  Grid pred(3, 1, 1), ref(3, 1, 1);
  pred.at(0, 0, 0) = 6.0f;  // oil palm
  ref.at(0, 0, 1) = 9.0f;   // nodata class
  pred.set_nodata(0, 2, false);
  EXPECT_EQ(CarbonClassConfusion(pred, ref).total, 1);
}

TEST(PercentileTest, OneToNineByHand) {
  std::vector<double> v{9, 1, 8, 2, 7, 3, 6, 4, 5};
  BoxplotSummary s = Summarize(v);
  // Positions p * 8 over 1..9: 0.8, 2, 4, 6, 7.2.
  EXPECT_DOUBLE_EQ(s.p10, 1.8);
  EXPECT_DOUBLE_EQ(s.q1, 3.0);
  EXPECT_DOUBLE_EQ(s.median, 5.0);
  EXPECT_DOUBLE_EQ(s.q3, 7.0);
  EXPECT_DOUBLE_EQ(s.p90, 8.2);
  EXPECT_EQ(s.count, 9);
  BoxplotSummary c = Summarize({5, 5, 5, 5});
  EXPECT_EQ(c.p10, 5.0);
  EXPECT_EQ(c.p90, 5.0);
}

TEST(GroupedBoxplotTest, OrderAndOmittedGroups) {
  std::mt19937_64 rng(4);
  std::normal_distribution<double> n(20.0, 8.0);
  std::vector<double> values;
  std::vector<int> groups;
  for (int i = 0; i < 500; ++i) {
    values.push_back(n(rng));
    groups.push_back(i % 2 ? 3 : 1);
  }
  // Duplicate group 1 as group 5 so the two summaries must match.
  for (int i = 0; i < 500; i += 2) {
    values.push_back(values[i]);
    groups.push_back(5);
  }
  const std::vector<int> order{0, 1, 3, 5};
  BoxplotResult r = GroupedBoxplot(values, groups, order);
  ASSERT_EQ(r.groups.size(), 3u);
  EXPECT_EQ(r.groups[0].group, 1);
  EXPECT_EQ(r.groups[2].group, 5);
  EXPECT_EQ(r.notes.size(), 1u);
  for (const auto& s : r.groups) {
    EXPECT_LE(s.p10, s.q1);
    EXPECT_LE(s.q1, s.median);
    EXPECT_LE(s.median, s.q3);
    EXPECT_LE(s.q3, s.p90);
  }
  EXPECT_EQ(r.groups[0].median, r.groups[2].median);
  EXPECT_EQ(r.groups[0].p90, r.groups[2].p90);
}

Grid ClassGrid(int w, int h, float v) {
  Grid g(w, h, 1);
  std::fill(g.values().begin(), g.values().end(), v);
  return g;
}

TEST(ZonalStatsTest, Examples) {
  Grid classes = ClassGrid(10, 10, 0.0f);
  Grid zones = ClassGrid(10, 10, 1.0f);
  auto one = ComputeZonalStats(classes, zones);
  ASSERT_EQ(one.size(), 1u);
  EXPECT_EQ(one[0].class_fractions[0], 1.0);
  EXPECT_DOUBLE_EQ(one[0].area_ha, 1.0);
  for (int r = 0; r < 10; ++r) {
    for (int c = 5; c < 10; ++c) {
      classes.at(0, r, c) = 5.0f;
      zones.at(0, r, c) = 2.0f;
    }
  }
  auto two = ComputeZonalStats(classes, zones);
  ASSERT_EQ(two.size(), 2u);
  EXPECT_EQ(two[0].hcs_fraction, 0.0);
  EXPECT_EQ(two[1].hcs_fraction, 1.0);
  auto ranked = ComputeZonalStats(classes, zones, true);
  EXPECT_EQ(ranked[0].zone_id, 2);
}

TEST(ZonalStatsTest, MatchesCountingOracle) {
  std::mt19937_64 rng(5);
  std::uniform_int_distribution<int> cls(0, 9), zone(1, 7);
  Grid classes(100, 100, 1), zones(100, 100, 1);
  for (float& v : classes.values()) v = static_cast<float>(cls(rng));
  for (float& v : zones.values()) v = static_cast<float>(zone(rng));
  std::map<int, std::vector<int64_t>> oracle;
  for (size_t i = 0; i < classes.pixel_count(); ++i) {
    auto& counts = oracle[static_cast<int>(zones.values()[i])];
    counts.resize(kHcsClassCount, 0);
    ++counts[static_cast<int>(classes.values()[i])];
  }
  auto stats = ComputeZonalStats(classes, zones);
  ASSERT_EQ(stats.size(), oracle.size());
  for (const auto& z : stats) {
    const auto& counts = oracle.at(z.zone_id);
    int64_t valid = 0;
    for (int k = 0; k < kHcsClassCount - 1; ++k) {
      EXPECT_EQ(z.class_counts[k], counts[k]);
      valid += counts[k];
    }
    EXPECT_EQ(z.count, valid);
    double sum = 0.0;
    for (double f : z.class_fractions) sum += f;
    EXPECT_NEAR(sum, 1.0, 1e-9);
    const int64_t hcs = counts[2] + counts[3] + counts[4] + counts[5];
    EXPECT_DOUBLE_EQ(z.hcs_fraction, static_cast<double>(hcs) / valid);
    EXPECT_NEAR(z.hcs_fraction + z.ols_fraction + z.plantation_fraction +
                    z.class_fractions[static_cast<int>(HcsClass::kUrban)], 1.0, 1e-9);
  }
}

TEST(CsvTest, HeadersAndNumberFormat) {
  const std::vector<std::pair<std::string, RegressionMetrics>> rows{{"h", {1.5, 1.0, -0.25, 2.25, 4}}};
  EXPECT_EQ(MetricsCsv(rows), "quantity,count,rmse,mae,me,mse\nh,4,1.5,1,-0.25,2.25\n");
  EXPECT_EQ(FormatNumber(0.1), "0.1");
  EXPECT_EQ(MetricsJson(rows)[0]["rmse"], 1.5);
}

}  // namespace
}  // namespace hcs
