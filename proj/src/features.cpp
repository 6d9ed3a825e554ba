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

#include "graphtune/features.hpp"

#include <cmath>
#include <sstream>

#include "graphtune/error.hpp"

namespace graphtune {

std::string_view feature_name(Feature f) {
  switch (f) {
    case Feature::kAspl:
      return "aspl";
    case Feature::kClustering:
      return "clustering";
    case Feature::kPowerlawExponent:
      return "powerlaw_exponent";
  }
  return "unknown";
}

Feature parse_feature(std::string_view name) {
  for (Feature f : {Feature::kAspl, Feature::kClustering,
                    Feature::kPowerlawExponent}) {
    if (feature_name(f) == name) return f;
  }
  throw ConfigError("unknown feature '" + std::string(name) + "'");
}

std::vector<Feature> parse_feature_list(std::string_view names) {
  std::vector<Feature> out;
  std::string item;
  std::istringstream in{std::string(names)};
  while (std::getline(in, item, ',')) {
    auto b = item.find_first_not_of(" \t");
    auto e = item.find_last_not_of(" \t");
    if (b == std::string::npos) continue;
    Feature f = parse_feature(item.substr(b, e - b + 1));
    for (Feature seen : out) {
      if (seen == f) throw ConfigError("duplicate feature '" + item + "'");
    }
    out.push_back(f);
  }
  if (out.empty()) throw ConfigError("empty feature list");
  return out;
}

std::string join_feature_names(std::span<const Feature> names) {
  std::string out;
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (i) out += ",";
    out += feature_name(names[i]);
  }
  return out;
}

FeatureVector::FeatureVector(std::vector<Feature> names,
                             std::vector<double> values)
    : names_(std::move(names)), values_(std::move(values)) {
  if (names_.size() != values_.size()) {
    throw ContractError("feature names and values differ in length");
  }
  for (std::size_t i = 0; i < names_.size(); ++i) {
    if (!std::isfinite(values_[i])) {
      throw ContractError("non-finite value for feature " +
                          std::string(feature_name(names_[i])));
    }
    for (std::size_t j = 0; j < i; ++j) {
      if (names_[i] == names_[j]) throw ContractError("duplicate feature name");
    }
  }
}

double FeatureVector::value(Feature f) const {
  for (std::size_t i = 0; i < names_.size(); ++i) {
    if (names_[i] == f) return values_[i];
  }
  throw ContractError("feature " + std::string(feature_name(f)) +
                      " not present");
}

double average_shortest_path_length(const Graph& g) {
  const Graph lcc = largest_component(g);
  const int n = lcc.node_count();
  if (n < 2) {
    throw UndefinedMetricError(
        "average shortest path length needs >= 2 nodes in the largest "
        "component");
  }
  double total = 0.0;
  for (NodeId s = 0; s < n; ++s) {
    const auto dist = bfs_distances(lcc, s);
    for (NodeId t = s + 1; t < n; ++t) total += dist[t];
  }
  return total / (0.5 * n * (n - 1));
}

double clustering_coefficient(const Graph& g) {
  const int n = g.node_count();
  if (n < 1) throw UndefinedMetricError("clustering needs >= 1 node");
  // Extended precision keeps small rational cases (5/6 and the like) exact
  // after the final rounding.
  long double sum = 0.0L;
  for (NodeId u = 0; u < n; ++u) {
    const auto& nb = g.neighbors(u);
    const std::size_t k = nb.size();
    if (k < 2) continue;
    std::size_t links = 0;
    for (std::size_t i = 0; i < k; ++i) {
      for (std::size_t j = i + 1; j < k; ++j) {
        if (g.has_edge(nb[i], nb[j])) ++links;
      }
    }
    sum += 2.0L * static_cast<long double>(links) / static_cast<long double>(k * (k - 1));
  }
  return static_cast<double>(sum / n);
}

double powerlaw_exponent_from_degrees(std::span<const double> degrees) {
  if (degrees.size() < 2) {
    throw UndefinedMetricError("power-law exponent needs >= 2 nodes");
  }
  constexpr double kMinDegree = 1.0;
  double log_sum = 0.0;
  for (double d : degrees) {
    if (d < kMinDegree) {
      throw UndefinedMetricError("power-law exponent needs all degrees >= 1");
    }
    log_sum += std::log(d / kMinDegree);
  }
  if (log_sum <= 0.0) {
    throw UndefinedMetricError(
        "power-law exponent undefined: every degree equals d_min");
  }
  return 1.0 + static_cast<double>(degrees.size()) / log_sum;
}

double powerlaw_exponent(const Graph& g) {
  std::vector<double> degrees(g.node_count());
  for (NodeId u = 0; u < g.node_count(); ++u) degrees[u] = g.degree(u);
  return powerlaw_exponent_from_degrees(degrees);
}

double compute_feature(const Graph& g, Feature f) {
  switch (f) {
    case Feature::kAspl:
      return average_shortest_path_length(g);
    case Feature::kClustering:
      return clustering_coefficient(g);
    case Feature::kPowerlawExponent:
      return powerlaw_exponent(g);
  }
  throw ConfigError("unknown feature");
}

FeatureVector compute_features(const Graph& g, std::span<const Feature> names) {
  std::vector<double> values;
  values.reserve(names.size());
  for (Feature f : names) {
    try {
      values.push_back(compute_feature(g, f));
    } catch (const UndefinedMetricError& e) {
      throw UndefinedMetricError(e.what(), std::string(feature_name(f)));
    }
  }
  return FeatureVector({names.begin(), names.end()}, std::move(values));
}

}  // namespace graphtune
