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

#include "canopy/predict.h"

#include <algorithm>
#include <numeric>

#include "common/error.h"

namespace hcs {

Grid PredictDense(const Model& model, const Grid& image,
                  const DenseOptions& options) {
  Grid raw = DenseInference(model, image, options);
  Grid out(image.width(), image.height(), 1, image.transform());
  out.band_names() = {"canopy_height"};
  out.nodata_mask() = raw.nodata_mask();
  const double shift = model.target_norm.shift.empty() ? 0.0 : model.target_norm.shift[0];
  const double scale = model.target_norm.scale.empty() ? 1.0 : model.target_norm.scale[0];
  const auto mean = raw.band(0);
  for (size_t i = 0; i < out.pixel_count(); ++i) {
    out.values()[i] = static_cast<float>(std::max(0.0, mean[i] * scale + shift));
  }
  return out;
}

Grid Composite(std::span<const Grid> predictions,
               std::span<const Grid> cloud_probs) {
  Require(!predictions.empty(), "composite of an empty list");
  Require(predictions.size() == cloud_probs.size(),
          "predictions and cloud probabilities differ in count");
  const Grid& ref = predictions.front();
  for (size_t i = 0; i < predictions.size(); ++i) {
    RequireAligned(ref, predictions[i], "prediction");
    RequireAligned(ref, cloud_probs[i], "cloud probability");
  }
  Grid out(ref.width(), ref.height(), 1, ref.transform());
  out.band_names() = {"canopy_height"};
  std::vector<double> values;
  for (int r = 0; r < ref.height(); ++r) {
    for (int c = 0; c < ref.width(); ++c) {
      values.clear();
      for (size_t i = 0; i < predictions.size(); ++i) {
        if (predictions[i].nodata(r, c) || cloud_probs[i].nodata(r, c)) continue;
        if (cloud_probs[i].at(0, r, c) < kCompositeCloudThreshold) {
          values.push_back(predictions[i].at(0, r, c));
        }
      }
      if (values.empty()) {
        out.set_nodata(r, c, true);
        continue;
      }
      std::sort(values.begin(), values.end());
      double sum = 0.0;
      for (double v : values) sum += v;
      out.at(0, r, c) = static_cast<float>(sum / values.size());
    }
  }
  return out;
}

double MeanCloudProbability(const Grid& cloud_prob) {
  if (cloud_prob.pixel_count() == 0) return 1.0;
  double sum = 0.0;
  for (size_t i = 0; i < cloud_prob.pixel_count(); ++i) {
    sum += cloud_prob.nodata_mask()[i] ? 1.0 : cloud_prob.values()[i];
  }
  return sum / cloud_prob.pixel_count();
}

std::vector<size_t> SelectLeastCloudy(std::span<const Grid> cloud_probs,
                                      size_t k) {
  Require(k <= cloud_probs.size(), "k exceeds the number of images");
  std::vector<double> mean(cloud_probs.size());
  for (size_t i = 0; i < mean.size(); ++i) mean[i] = MeanCloudProbability(cloud_probs[i]);
  std::vector<size_t> order(mean.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](size_t a, size_t b) { return mean[a] < mean[b]; });
  order.resize(k);
  return order;
}

}  // namespace hcs
