// Copyright 2026 The graphtune Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "graphtune/dataset.hpp"
#include "graphtune/generation.hpp"
#include "graphtune/model.hpp"
#include "graphtune/training.hpp"

namespace graphtune::cli {

enum ExitCode : int {
  kExitOk = 0,
  kExitUsage = 1,
  kExitData = 2,
  kExitDivergence = 3,
};

struct GenerateSettings {
  /// Each entry holds one raw value per feature.
  std::vector<std::vector<double>> conditions{{3.0}, {4.0}, {5.0}};
  std::size_t count = 300;
  std::uint64_t seed = 0;
  double temperature = 1.0;
  bool argmax = false;
  std::size_t retry_factor = 20;
};

/// Everything a run needs besides file paths. Loaded from and echoed as a
/// sectioned INI file; keys that are absent keep their defaults.
struct RunConfig {
  std::vector<Feature> features{Feature::kAspl};
  SamplingOptions sampling;
  MixtureOptions synthetic;
  ModelConfig model;
  TrainConfig train;
  GenerateSettings generate;
  int log_every = 50;
};

/// Throws ConfigError on unreadable files, unknown keys or bad values.
RunConfig load_run_config(const std::filesystem::path& path);
RunConfig parse_run_config(const std::string& text);
/// Complete INI text; parse_run_config(run_config_text(c)) reproduces c.
std::string run_config_text(const RunConfig& config);

/// Directory name for one condition, e.g. "c3" or "c2.5".
std::string condition_dir_name(const std::vector<double>& condition);

/// Entry point of the `graphtune` tool. Diagnostics go to `err`.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace graphtune::cli
