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

// Command-line front end. Every subcommand goes through the C API.

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "hcsmap/hcsmap.h"

namespace {

constexpr int kExitError = 1;
constexpr int kExitConfig = 2;
constexpr char kOutputRootEnv[] = "HCSMAP_OUTPUT_ROOT";

constexpr const char* kCommands[] = {
    "synth",          "train-canopy", "predict", "composite", "train-carbon",
    "predict-carbon", "classify",     "stats",   "eval",      "grad-check"};

struct Options {
  std::string config_path;
  std::string output_dir;
  uint64_t seed = 0;
  int threads = 0;
};

bool ReadText(const std::string& path, std::string& out) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return false;
  std::ostringstream ss;
  ss << in.rdbuf();
  out = ss.str();
  return true;
}

int Fail(int code, const std::string& message) {
  std::fprintf(stderr, "hcsmap: %s\n", message.c_str());
  return code;
}

int PrintGradCheck(const char* summary) {
  const auto j = nlohmann::json::parse(summary);
  for (const auto& c : j.at("cases")) {
    std::printf("%-28s max_rel_error %.3e  checked %zu  skipped_at_kinks %zu\n",
                c.at("case").get<std::string>().c_str(), c.at("max_rel_error").get<double>(),
                c.at("checked").get<size_t>(), c.at("skipped_at_kinks").get<size_t>());
  }
  std::printf("max relative error: %.3e (tolerance 1e-4)\n", j.at("max_rel_error").get<double>());
  return 0;
}

int Run(const std::string& command, const Options& opt, CLI::App& sub) {
  std::string text = "{}";
  if (!opt.config_path.empty()) {
    if (!ReadText(opt.config_path, text)) {
      return Fail(kExitConfig, "cannot read config " + opt.config_path);
    }
  } else if (command != "grad-check") {
    return Fail(kExitConfig, "--config is required for " + command);
  }

  hcs_pipeline* p = nullptr;
  if (hcs_pipeline_create(text.c_str(), &p) != HCS_OK) {
    return Fail(kExitConfig, hcs_last_error());
  }
  std::string output_dir = opt.output_dir;
  if (output_dir.empty()) {
    if (const char* env = std::getenv(kOutputRootEnv); env && *env) output_dir = env;
  }
  hcs_status status = HCS_OK;
  if (!output_dir.empty()) status = hcs_pipeline_set_output_dir(p, output_dir.c_str());
  if (status == HCS_OK && sub.count("--seed")) status = hcs_pipeline_set_seed(p, opt.seed);
  if (status == HCS_OK && sub.count("--threads")) status = hcs_pipeline_set_threads(p, opt.threads);
  if (status != HCS_OK) {
    const std::string msg = hcs_last_error();
    hcs_pipeline_free(p);
    return Fail(kExitConfig, msg);
  }

  char* summary = nullptr;
  status = hcs_pipeline_run(p, command.c_str(), &summary);
  int code = 0;
  if (command == "grad-check" && summary) {
    PrintGradCheck(summary);
  } else if (summary) {
    std::printf("%s\n", summary);
  }
  if (status != HCS_OK) code = Fail(kExitError, hcs_last_error());
  hcs_string_free(summary);
  hcs_pipeline_free(p);
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"hcsmap: canopy height, carbon density and HCS stratification pipeline"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(hcs_version()));
  Options opt;
  for (const char* name : kCommands) {
    CLI::App* sub = app.add_subcommand(name, std::string("run the ") + name + " stage");
    sub->add_option("-c,--config", opt.config_path, "pipeline config (JSON)");
    sub->add_option("--seed", opt.seed, "global seed (overrides config)");
    sub->add_option("--threads", opt.threads, "worker threads (overrides config)")
        ->check(CLI::PositiveNumber);
    sub->add_option("-o,--output-dir", opt.output_dir,
                    std::string("output root (overrides $") + kOutputRootEnv + " and config)");
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitConfig;
  }
  for (CLI::App* sub : app.get_subcommands()) return Run(sub->get_name(), opt, *sub);
  return kExitError;
}
