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

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "graphtune/features.hpp"
#include "graphtune/graph.hpp"
#include "graphtune/model.hpp"
#include "graphtune/training.hpp"

namespace graphtune {

/// All graphs handed to evaluate() failed the metric preconditions.
class EmptyEvaluationError : public Error {
 public:
  using Error::Error;
};

struct FeatureSummary {
  Feature feature = Feature::kAspl;
  double target = 0.0;
  double mean = 0.0;
  /// Sample standard deviation; 0 for a single graph.
  double std = 0.0;
  double mae = 0.0;
};

struct Evaluation {
  std::vector<Feature> feature_order;
  /// Indices (into the evaluated list) of graphs that were scored.
  std::vector<std::size_t> scored;
  std::vector<FeatureVector> features;
  std::vector<FeatureSummary> summary;
  /// Graphs skipped because a metric is undefined on them.
  std::size_t unscored = 0;
  /// Scored on their largest component.
  std::size_t disconnected = 0;
};

/// Per-graph features and mean / std / MAE against `targets` (raw units, one
/// per feature). Throws EmptyEvaluationError when no graph can be scored.
Evaluation evaluate(std::span<const Graph> graphs, std::span<const Feature> order,
                    std::span<const double> targets);

struct KdePoint {
  double x = 0.0;
  double density = 0.0;
};

struct KdeOptions {
  /// Scott's rule when unset.
  std::optional<double> bandwidth;
  int points = 256;
};

struct Kde {
  double bandwidth = 0.0;
  std::vector<double> values;
  std::vector<KdePoint> grid;

  double density(double x) const;
};

/// sigma * n^(-1/5) with the sample standard deviation, floored at 1e-3.
double scott_bandwidth(std::span<const double> values);
/// Gaussian KDE on an even grid over [min - 3h, max + 3h].
Kde kde(std::span<const double> values, const KdeOptions& options = {});
double trapezoid(std::span<const KdePoint> grid);

struct GenerationOptions {
  std::size_t count = 300;
  std::uint64_t seed = 0;
  double temperature = 1.0;
  bool argmax = false;
  /// Sampling stops after retry_factor * count sequences.
  std::size_t retry_factor = 20;
};

struct GenerationReport {
  std::vector<Feature> feature_order;
  std::vector<double> condition;  // raw units
  std::size_t requested = 0;
  std::size_t produced = 0;
  std::size_t sampled = 0;
  double validity_rate = 0.0;
  /// Empty when nothing could be scored.
  std::optional<Evaluation> evaluation;
  std::vector<Kde> kde;  // one per feature
  std::optional<std::string> warning;
};

struct Generated {
  std::vector<Graph> graphs;
  GenerationReport report;
};

/// Samples graphs from the decoder at a raw-unit condition. Only the encoder-
/// decoder partitions are read; the estimator is never consulted.
Generated generate(const GraphTuneModel& model, const ModelParams& params,
                   const Standardizer& standardizer,
                   std::span<const Feature> feature_order,
                   std::span<const double> condition,
                   const GenerationOptions& options);
Generated generate(const TrainCheckpoint& checkpoint,
                   std::span<const double> condition,
                   const GenerationOptions& options);

// Report files. Numbers are written with round-trip precision so reruns are
// byte-identical.
std::string features_csv(const Evaluation& evaluation);
std::string kde_csv(std::span<const Feature> order, std::span<const Kde> kdes);
std::string summary_json(const GenerationReport& report);
/// Summary of a plain evaluation (no sampling statistics).
std::string evaluation_json(const Evaluation& evaluation, std::span<const Kde> kdes);
/// Writes features.csv, kde.csv and summary.json into `dir`.
void write_report(const GenerationReport& report, const std::filesystem::path& dir);

}  // namespace graphtune
