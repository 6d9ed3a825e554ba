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

// Test-only oracles. Nothing here calls into the implementation paths they
// check.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <vector>

#include "graphtune/graph.hpp"

namespace graphtune::testing {

/// All-pairs hop distances by Floyd-Warshall; unreachable pairs are +inf.
inline std::vector<std::vector<double>> floyd_warshall(const Graph& g) {
  const int n = g.node_count();
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<std::vector<double>> d(n, std::vector<double>(n, inf));
  for (int i = 0; i < n; ++i) d[i][i] = 0.0;
  for (const auto& [u, v] : g.edges()) d[u][v] = d[v][u] = 1.0;
  for (int k = 0; k < n; ++k) {
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        if (d[i][k] + d[k][j] < d[i][j]) d[i][j] = d[i][k] + d[k][j];
      }
    }
  }
  return d;
}

/// ASPL over the largest component, via Floyd-Warshall and union-find-free
/// component detection from the distance matrix.
inline double aspl_oracle(const Graph& g) {
  const auto d = floyd_warshall(g);
  const int n = g.node_count();
  std::vector<int> comp(n, -1);
  int best = -1;
  std::size_t best_size = 0;
  for (int i = 0; i < n; ++i) {
    if (comp[i] >= 0) continue;
    std::size_t size = 0;
    for (int j = 0; j < n; ++j) {
      if (std::isfinite(d[i][j])) {
        comp[j] = i;
        ++size;
      }
    }
    if (size > best_size) {
      best_size = size;
      best = i;
    }
  }
  double total = 0.0;
  double pairs = 0.0;
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      if (comp[i] == best && comp[j] == best) {
        total += d[i][j];
        pairs += 1.0;
      }
    }
  }
  return total / pairs;
}

/// Brute-force isomorphism over all node permutations (n <= 8).
inline bool isomorphic_bruteforce(const Graph& a, const Graph& b) {
  if (a.node_count() != b.node_count() || a.edge_count() != b.edge_count()) {
    return false;
  }
  std::vector<int> perm(a.node_count());
  std::iota(perm.begin(), perm.end(), 0);
  do {
    bool ok = true;
    for (const auto& [u, v] : a.edges()) {
      if (!b.has_edge(perm[u], perm[v])) {
        ok = false;
        break;
      }
    }
    if (ok) return true;
  } while (std::next_permutation(perm.begin(), perm.end()));
  return false;
}

struct Fingerprint {
  std::vector<int> degrees;
  std::size_t edges = 0;
  long long triangles = 0;
  std::vector<double> eccentricities;
  bool operator==(const Fingerprint&) const = default;
};

/// Isomorphism invariants: degree multiset, edge count, triangle count and
/// the sorted eccentricity multiset (from Floyd-Warshall).
inline Fingerprint fingerprint(const Graph& g) {
  Fingerprint f;
  const int n = g.node_count();
  for (int u = 0; u < n; ++u) f.degrees.push_back(static_cast<int>(g.neighbors(u).size()));
  std::sort(f.degrees.begin(), f.degrees.end());
  f.edges = g.edges().size();
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      for (int k = j + 1; k < n; ++k) {
        if (g.has_edge(i, j) && g.has_edge(j, k) && g.has_edge(i, k)) ++f.triangles;
      }
    }
  }
  const auto d = floyd_warshall(g);
  for (int i = 0; i < n; ++i) {
    f.eccentricities.push_back(*std::max_element(d[i].begin(), d[i].end()));
  }
  std::sort(f.eccentricities.begin(), f.eccentricities.end());
  return f;
}

/// |a - n| / max(|a| + |n|, floor).
inline double relative_error(double analytic, double numeric, double floor = 1e-6) {
  return std::abs(analytic - numeric) /
         std::max(std::abs(analytic) + std::abs(numeric), floor);
}

/// Central difference of f at x along coordinate `value`.
inline double central_difference(const std::function<double()>& f, double& value,
                                 double step) {
  const double saved = value;
  value = saved + step;
  const double plus = f();
  value = saved - step;
  const double minus = f();
  value = saved;
  return (plus - minus) / (2.0 * step);
}

}  // namespace graphtune::testing
