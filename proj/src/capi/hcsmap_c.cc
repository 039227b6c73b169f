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

#include "hcsmap/hcsmap.h"

#include <algorithm>
#include <cstring>
#include <filesystem>
#include <memory>
#include <exception>
#include <string>

#include "common/error.h"
#include "common/version.h"
#include "grid/grd_io.h"
#include "hcs/hcs.h"
#include "nn/grad_check.h"
#include "pipeline/commands.h"
#include "pipeline/config.h"

struct hcs_pipeline {
  hcs::PipelineConfig config;
};

struct hcs_grid {
  hcs::Grid grid;
};

namespace {

thread_local std::string last_error;

hcs_status ToStatus(hcs::ErrorCode code) {
  switch (code) {
    case hcs::ErrorCode::kInvalidArgument: return HCS_ERR_INVALID_ARGUMENT;
    case hcs::ErrorCode::kConfig: return HCS_ERR_CONFIG;
    case hcs::ErrorCode::kIo: return HCS_ERR_IO;
    default: return HCS_ERR_RUNTIME;
  }
}

template <typename Fn>
hcs_status Guard(Fn&& fn) {
  last_error.clear();
  try {
    fn();
    return HCS_OK;
  } catch (const hcs::Error& e) {
    last_error = e.what();
    return ToStatus(e.code());
  } catch (const std::bad_alloc&) {
    last_error = "out of memory";
  } catch (const std::filesystem::filesystem_error& e) {
    last_error = e.what();
    return HCS_ERR_IO;
  } catch (const std::exception& e) {
    last_error = e.what();
  } catch (...) {
    last_error = "unknown error";
  }
  return HCS_ERR_RUNTIME;
}

hcs_status Invalid(const char* message) {
  last_error = message;
  return HCS_ERR_INVALID_ARGUMENT;
}

char* CopyString(const std::string& s) {
  char* out = new char[s.size() + 1];
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

}  // namespace

extern "C" {

const char* hcs_last_error(void) { return last_error.c_str(); }

const char* hcs_version(void) { return hcs::kVersion; }

void hcs_string_free(char* s) { delete[] s; }

hcs_status hcs_pipeline_create(const char* config_json, hcs_pipeline** out) {
  if (!config_json || !out) return Invalid("null argument");
  *out = nullptr;
  return Guard([&] {
    auto p = std::make_unique<hcs_pipeline>();
    p->config = hcs::ParsePipelineConfig(config_json);
    *out = p.release();
  });
}

void hcs_pipeline_free(hcs_pipeline* p) { delete p; }

hcs_status hcs_pipeline_set_seed(hcs_pipeline* p, uint64_t seed) {
  if (!p) return Invalid("null pipeline");
  p->config.seed = seed;
  return HCS_OK;
}

hcs_status hcs_pipeline_set_threads(hcs_pipeline* p, int threads) {
  if (!p) return Invalid("null pipeline");
  if (threads < 1) return Invalid("threads must be at least 1");
  p->config.threads = threads;
  return HCS_OK;
}

hcs_status hcs_pipeline_set_output_dir(hcs_pipeline* p, const char* dir) {
  if (!p || !dir) return Invalid("null argument");
  if (!*dir) return Invalid("empty output directory");
  p->config.output_dir = dir;
  return HCS_OK;
}

hcs_status hcs_pipeline_config(const hcs_pipeline* p, char** config_json) {
  if (!p || !config_json) return Invalid("null argument");
  return Guard([&] { *config_json = CopyString(hcs::SerializePipelineConfig(p->config)); });
}

hcs_status hcs_pipeline_run(hcs_pipeline* p, const char* command, char** summary_json) {
  if (!p || !command) return Invalid("null argument");
  if (summary_json) *summary_json = nullptr;
  if (!hcs::IsCommand(command)) {
    last_error = std::string("unknown command '") + command + "'";
    return HCS_ERR_INVALID_ARGUMENT;
  }
  bool failed_check = false;
  const hcs_status status = Guard([&] {
    const nlohmann::json summary = hcs::RunCommand(p->config, command);
    if (summary.contains("passed") && !summary.at("passed").get<bool>()) failed_check = true;
    if (summary_json) *summary_json = CopyString(summary.dump());
  });
  if (status == HCS_OK && failed_check) {
    last_error = "gradient check exceeded tolerance";
    return HCS_ERR_RUNTIME;
  }
  return status;
}

hcs_status hcs_grid_load(const char* path, hcs_grid** out) {
  if (!path || !out) return Invalid("null argument");
  *out = nullptr;
  return Guard([&] {
    auto g = std::make_unique<hcs_grid>();
    g->grid = hcs::ReadGrd1(path);
    *out = g.release();
  });
}

void hcs_grid_free(hcs_grid* g) { delete g; }

hcs_status hcs_grid_shape(const hcs_grid* g, int* width, int* height, int* bands) {
  if (!g) return Invalid("null grid");
  if (width) *width = g->grid.width();
  if (height) *height = g->grid.height();
  if (bands) *bands = g->grid.bands();
  return HCS_OK;
}

hcs_status hcs_grid_transform(const hcs_grid* g, double* origin_x, double* origin_y,
                              double* pixel_size) {
  if (!g) return Invalid("null grid");
  const auto& t = g->grid.transform();
  if (origin_x) *origin_x = t.origin_x;
  if (origin_y) *origin_y = t.origin_y;
  if (pixel_size) *pixel_size = t.pixel_size;
  return HCS_OK;
}

hcs_status hcs_grid_value(const hcs_grid* g, int band, int row, int col, float* value,
                          int* is_nodata) {
  if (!g || !value) return Invalid("null argument");
  const hcs::Grid& grid = g->grid;
  if (band < 0 || row < 0 || col < 0 || band >= grid.bands() || row >= grid.height() ||
      col >= grid.width()) {
    return Invalid("index outside grid");
  }
  *value = grid.at(band, row, col);
  if (is_nodata) *is_nodata = grid.nodata(row, col) ? 1 : 0;
  return HCS_OK;
}

hcs_status hcs_classify_carbon(double density, int* class_code) {
  if (!class_code) return Invalid("null argument");
  return Guard([&] { *class_code = static_cast<int>(hcs::ClassifyCarbon(density)); });
}

hcs_status hcs_grad_check(double* max_rel_error) {
  if (!max_rel_error) return Invalid("null argument");
  return Guard([&] {
    double worst = 0.0;
    for (const auto& c : hcs::RunStandardGradChecks()) {
      worst = std::max(worst, c.result.max_rel_error);
    }
    *max_rel_error = worst;
  });
}

}  // extern "C"
