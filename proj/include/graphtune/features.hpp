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

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "graphtune/graph.hpp"

namespace graphtune {

enum class Feature { kAspl, kClustering, kPowerlawExponent };

std::string_view feature_name(Feature f);
/// Inverse of feature_name; throws ConfigError on unknown names.
Feature parse_feature(std::string_view name);
/// Parses a comma-separated list such as "aspl,clustering".
std::vector<Feature> parse_feature_list(std::string_view names);
std::string join_feature_names(std::span<const Feature> names);

/// Ordered (feature, value) pairs. Used as condition vector, estimator
/// target and evaluation record alike.
class FeatureVector {
 public:
  FeatureVector() = default;
  FeatureVector(std::vector<Feature> names, std::vector<double> values);

  std::size_t size() const { return names_.size(); }
  const std::vector<Feature>& names() const { return names_; }
  const std::vector<double>& values() const { return values_; }
  double value(std::size_t i) const { return values_[i]; }
  /// Value by name; throws ContractError if absent.
  double value(Feature f) const;

  friend bool operator==(const FeatureVector&, const FeatureVector&) = default;

 private:
  std::vector<Feature> names_;
  std::vector<double> values_;
};

/// Mean hop distance over unordered node pairs of the largest connected
/// component.
double average_shortest_path_length(const Graph& g);

/// Average local clustering; nodes of degree < 2 contribute 0.
double clustering_coefficient(const Graph& g);

/// Continuous power-law MLE with d_min = 1: 1 + n / sum(ln d_i).
double powerlaw_exponent(const Graph& g);
double powerlaw_exponent_from_degrees(std::span<const double> degrees);

double compute_feature(const Graph& g, Feature f);
FeatureVector compute_features(const Graph& g, std::span<const Feature> names);

}  // namespace graphtune
