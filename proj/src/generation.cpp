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

#include "graphtune/generation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <numeric>
#include <random>

#include <nlohmann/json.hpp>

namespace graphtune {

namespace {

double mean_of(std::span<const double> v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double sample_std(std::span<const double> v) {
  if (v.size() < 2) return 0.0;
  const double m = mean_of(v);
  double ss = 0.0;
  for (double x : v) ss += (x - m) * (x - m);
  return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::vector<double> column(const Evaluation& e, std::size_t f) {
  std::vector<double> out;
  out.reserve(e.features.size());
  for (const auto& fv : e.features) out.push_back(fv.value(f));
  return out;
}

}  // namespace

Evaluation evaluate(std::span<const Graph> graphs, std::span<const Feature> order,
                    std::span<const double> targets) {
  if (order.empty()) throw ConfigError("evaluate: empty feature order");
  if (targets.size() != order.size()) {
    throw ContractError("evaluate: need one target per feature");
  }
  Evaluation e;
  e.feature_order.assign(order.begin(), order.end());
  for (std::size_t i = 0; i < graphs.size(); ++i) {
    try {
      e.features.push_back(compute_features(graphs[i], order));
    } catch (const UndefinedMetricError&) {
      ++e.unscored;
      continue;
    }
    e.scored.push_back(i);
    if (!graphs[i].is_connected()) ++e.disconnected;
  }
  if (e.features.empty()) {
    throw EmptyEvaluationError("no graph satisfies the metric preconditions (" +
                               std::to_string(graphs.size()) + " given)");
  }
  for (std::size_t f = 0; f < order.size(); ++f) {
    const std::vector<double> v = column(e, f);
    FeatureSummary s;
    s.feature = order[f];
    s.target = targets[f];
    s.mean = mean_of(v);
    s.std = sample_std(v);
    double abs_sum = 0.0;
    for (double x : v) abs_sum += std::abs(x - targets[f]);
    s.mae = abs_sum / static_cast<double>(v.size());
    e.summary.push_back(s);
  }
  return e;
}

double scott_bandwidth(std::span<const double> values) {
  if (values.empty()) throw ContractError("kde: no values");
  const double h = sample_std(values) *
                   std::pow(static_cast<double>(values.size()), -0.2);
  return std::max(h, 1e-3);
}

double Kde::density(double x) const {
  const double norm = 1.0 / (static_cast<double>(values.size()) * bandwidth *
                             std::sqrt(2.0 * std::numbers::pi));
  double sum = 0.0;
  for (double v : values) {
    const double z = (x - v) / bandwidth;
    sum += std::exp(-0.5 * z * z);
  }
  return norm * sum;
}

Kde kde(std::span<const double> values, const KdeOptions& options) {
  if (values.empty()) throw ContractError("kde: no values");
  if (options.points < 2) throw ConfigError("kde: need at least 2 grid points");
  Kde k;
  k.bandwidth = options.bandwidth ? *options.bandwidth : scott_bandwidth(values);
  if (!(k.bandwidth > 0.0)) throw ConfigError("kde: bandwidth must be > 0");
  k.values.assign(values.begin(), values.end());
  const auto [lo_it, hi_it] = std::minmax_element(values.begin(), values.end());
  const double lo = *lo_it - 3.0 * k.bandwidth;
  const double hi = *hi_it + 3.0 * k.bandwidth;
  const double dx = (hi - lo) / (options.points - 1);
  k.grid.reserve(static_cast<std::size_t>(options.points));
  for (int i = 0; i < options.points; ++i) {
    // Mirror the last point onto hi exactly so symmetric inputs give
    // symmetric grids.
    const double x = i == options.points - 1 ? hi : lo + dx * i;
    k.grid.push_back({x, k.density(x)});
  }
  return k;
}

double trapezoid(std::span<const KdePoint> grid) {
  double area = 0.0;
  for (std::size_t i = 1; i < grid.size(); ++i) {
    area += 0.5 * (grid[i].density + grid[i - 1].density) * (grid[i].x - grid[i - 1].x);
  }
  return area;
}

Generated generate(const GraphTuneModel& model, const ModelParams& params,
                   const Standardizer& standardizer,
                   std::span<const Feature> feature_order,
                   std::span<const double> condition,
                   const GenerationOptions& options) {
  const ModelConfig& mc = model.config();
  if (options.count < 1) throw ConfigError("generate: count must be >= 1");
  if (options.retry_factor < 1) throw ConfigError("generate: retry_factor must be >= 1");
  if (!(options.temperature > 0.0)) throw ConfigError("generate: temperature must be > 0");
  if (static_cast<int>(condition.size()) != mc.condition_dim ||
      feature_order.size() != condition.size()) {
    throw ConfigError("generate: condition has " + std::to_string(condition.size()) +
                      " values, model expects " + std::to_string(mc.condition_dim));
  }
  model.check_layout(params);

  const Vector cond = standardizer.apply(condition);
  std::mt19937_64 rng(options.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  const SlotSampler sampler = options.argmax
                                  ? argmax_sampler()
                                  : categorical_sampler(rng, options.temperature);
  const int max_steps = mc.max_sequence_length - 1;
  const std::size_t budget = options.retry_factor * options.count;

  Generated out;
  GenerationReport& r = out.report;
  r.feature_order.assign(feature_order.begin(), feature_order.end());
  r.condition.assign(condition.begin(), condition.end());
  r.requested = options.count;
  while (out.graphs.size() < options.count && r.sampled < budget) {
    Vector z(mc.latent_dim);
    for (Eigen::Index i = 0; i < z.size(); ++i) z(i) = normal(rng);
    const TokenSequence seq = model.generate(params, z, cond, sampler, max_steps);
    ++r.sampled;
    try {
      out.graphs.push_back(decode(from_tokens(seq)));
    } catch (const InvalidCodeError&) {
      continue;
    }
  }
  r.produced = out.graphs.size();
  r.validity_rate = static_cast<double>(r.produced) / static_cast<double>(r.sampled);
  if (r.produced < r.requested) {
    r.warning = "retry budget of " + std::to_string(budget) + " sequences exhausted with " +
                std::to_string(r.produced) + " of " + std::to_string(r.requested) +
                " graphs";
  }
  if (!out.graphs.empty()) {
    try {
      r.evaluation = evaluate(out.graphs, feature_order, condition);
    } catch (const EmptyEvaluationError& e) {
      r.warning = r.warning ? *r.warning + "; " + e.what() : std::string(e.what());
    }
  }
  if (r.evaluation) {
    for (std::size_t f = 0; f < feature_order.size(); ++f) {
      r.kde.push_back(kde(column(*r.evaluation, f)));
    }
  }
  return out;
}

Generated generate(const TrainCheckpoint& checkpoint,
                   std::span<const double> condition,
                   const GenerationOptions& options) {
  return generate(GraphTuneModel(checkpoint.model), checkpoint.params,
                  checkpoint.standardizer, checkpoint.feature_order, condition,
                  options);
}

std::string features_csv(const Evaluation& evaluation) {
  std::string out = "graph";
  for (Feature f : evaluation.feature_order) out += ',' + std::string(feature_name(f));
  out += '\n';
  for (std::size_t i = 0; i < evaluation.features.size(); ++i) {
    out += std::to_string(evaluation.scored[i]);
    for (double v : evaluation.features[i].values()) out += ',' + num(v);
    out += '\n';
  }
  return out;
}

std::string kde_csv(std::span<const Feature> order, std::span<const Kde> kdes) {
  std::string out = "feature,x,density\n";
  for (std::size_t f = 0; f < kdes.size(); ++f) {
    const std::string name(feature_name(order[f]));
    for (const auto& p : kdes[f].grid) out += name + ',' + num(p.x) + ',' + num(p.density) + '\n';
  }
  return out;
}

namespace {

void put_evaluation(nlohmann::ordered_json& j, const Evaluation& e,
                    std::span<const Kde> kdes) {
  j["scored"] = e.features.size();
  j["unscored"] = e.unscored;
  j["disconnected"] = e.disconnected;
  auto& feats = j["features"] = nlohmann::ordered_json::object();
  for (std::size_t f = 0; f < e.summary.size(); ++f) {
    const FeatureSummary& s = e.summary[f];
    auto& o = feats[std::string(feature_name(s.feature))];
    o["target"] = s.target;
    o["mean"] = s.mean;
    o["std"] = s.std;
    o["mae"] = s.mae;
    if (f < kdes.size()) o["kde_bandwidth"] = kdes[f].bandwidth;
  }
}

}  // namespace

std::string summary_json(const GenerationReport& report) {
  nlohmann::ordered_json j;
  j["condition"] = nlohmann::ordered_json::object();
  for (std::size_t f = 0; f < report.feature_order.size(); ++f) {
    j["condition"][std::string(feature_name(report.feature_order[f]))] = report.condition[f];
  }
  j["requested"] = report.requested;
  j["produced"] = report.produced;
  j["sampled"] = report.sampled;
  j["validity_rate"] = report.validity_rate;
  j["scoring"] = "largest connected component";
  j["kde_bandwidth_rule"] = "scott";
  if (report.evaluation) put_evaluation(j, *report.evaluation, report.kde);
  j["warning"] = report.warning ? nlohmann::ordered_json(*report.warning)
                                : nlohmann::ordered_json(nullptr);
  return j.dump(2) + "\n";
}

std::string evaluation_json(const Evaluation& evaluation, std::span<const Kde> kdes) {
  nlohmann::ordered_json j;
  j["scoring"] = "largest connected component";
  j["kde_bandwidth_rule"] = "scott";
  put_evaluation(j, evaluation, kdes);
  return j.dump(2) + "\n";
}

void write_report(const GenerationReport& report, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  auto put = [&](const char* name, const std::string& text) {
    std::ofstream out(dir / name, std::ios::binary);
    out << text;
    if (!out) throw FormatError("cannot write " + (dir / name).string());
  };
  if (report.evaluation) {
    put("features.csv", features_csv(*report.evaluation));
    put("kde.csv", kde_csv(report.feature_order, report.kde));
  }
  put("summary.json", summary_json(report));
}

}  // namespace graphtune
