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

#include "graphtune/graph.hpp"

#include <algorithm>
#include <queue>
#include <sstream>

#include "graphtune/error.hpp"

namespace graphtune {

Graph::Graph(int node_count) : node_count_(node_count) {
  if (node_count < 0) throw InvalidGraphError("negative node count");
  adjacency_.resize(node_count);
}

Graph Graph::from_edges(int node_count, std::span<const Edge> edges) {
  Graph g(node_count);
  for (const auto& [u, v] : edges) {
    if (u == v) {
      throw InvalidGraphError("self-loop on node " + std::to_string(u));
    }
    if (!g.add_edge(u, v)) {
      throw InvalidGraphError("duplicate edge " + std::to_string(u) + "-" +
                              std::to_string(v));
    }
  }
  return g;
}

bool Graph::add_edge(NodeId u, NodeId v) {
  if (u < 0 || v < 0 || u >= node_count_ || v >= node_count_) {
    throw InvalidGraphError("edge " + std::to_string(u) + "-" +
                            std::to_string(v) + " out of range for " +
                            std::to_string(node_count_) + " nodes");
  }
  if (u == v) return false;
  Edge e = std::minmax(u, v);
  auto it = std::lower_bound(edges_.begin(), edges_.end(), e);
  if (it != edges_.end() && *it == e) return false;
  edges_.insert(it, e);
  auto& nu = adjacency_[u];
  nu.insert(std::lower_bound(nu.begin(), nu.end(), v), v);
  auto& nv = adjacency_[v];
  nv.insert(std::lower_bound(nv.begin(), nv.end(), u), u);
  return true;
}

bool Graph::remove_edge(NodeId u, NodeId v) {
  if (!has_edge(u, v)) return false;
  Edge e = std::minmax(u, v);
  edges_.erase(std::lower_bound(edges_.begin(), edges_.end(), e));
  auto& nu = adjacency_[u];
  nu.erase(std::lower_bound(nu.begin(), nu.end(), v));
  auto& nv = adjacency_[v];
  nv.erase(std::lower_bound(nv.begin(), nv.end(), u));
  return true;
}

bool Graph::has_edge(NodeId u, NodeId v) const {
  if (u < 0 || v < 0 || u >= node_count_ || v >= node_count_) return false;
  const auto& nu = adjacency_[u];
  return std::binary_search(nu.begin(), nu.end(), v);
}

std::vector<std::vector<NodeId>> Graph::components() const {
  std::vector<std::vector<NodeId>> out;
  std::vector<char> seen(node_count_, 0);
  for (NodeId s = 0; s < node_count_; ++s) {
    if (seen[s]) continue;
    std::vector<NodeId> comp;
    std::queue<NodeId> frontier;
    frontier.push(s);
    seen[s] = 1;
    while (!frontier.empty()) {
      NodeId u = frontier.front();
      frontier.pop();
      comp.push_back(u);
      for (NodeId v : adjacency_[u]) {
        if (!seen[v]) {
          seen[v] = 1;
          frontier.push(v);
        }
      }
    }
    std::sort(comp.begin(), comp.end());
    out.push_back(std::move(comp));
  }
  return out;
}

bool Graph::is_connected() const {
  if (node_count_ == 0) return false;
  const auto dist = bfs_distances(*this, 0);
  return std::find(dist.begin(), dist.end(), -1) == dist.end();
}

Graph Graph::induced(std::span<const NodeId> nodes) const {
  std::vector<NodeId> index(node_count_, -1);
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    index[nodes[i]] = static_cast<NodeId>(i);
  }
  Graph g(static_cast<int>(nodes.size()));
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    for (NodeId v : adjacency_[nodes[i]]) {
      if (index[v] > static_cast<NodeId>(i)) {
        g.add_edge(static_cast<NodeId>(i), index[v]);
      }
    }
  }
  return g;
}

Graph Graph::relabeled(std::span<const NodeId> permutation) const {
  Graph g(node_count_);
  for (const auto& [u, v] : edges_) g.add_edge(permutation[u], permutation[v]);
  return g;
}

Graph largest_component(const Graph& g) {
  auto comps = g.components();
  if (comps.empty()) return Graph();
  // components() is ordered by minimum id, so the first maximum wins ties.
  auto best = std::max_element(
      comps.begin(), comps.end(),
      [](const auto& a, const auto& b) { return a.size() < b.size(); });
  if (best->size() == static_cast<std::size_t>(g.node_count())) return g;
  return g.induced(*best);
}

std::vector<int> bfs_distances(const Graph& g, NodeId source) {
  std::vector<int> dist(g.node_count(), -1);
  std::queue<NodeId> frontier;
  dist[source] = 0;
  frontier.push(source);
  while (!frontier.empty()) {
    NodeId u = frontier.front();
    frontier.pop();
    for (NodeId v : g.neighbors(u)) {
      if (dist[v] < 0) {
        dist[v] = dist[u] + 1;
        frontier.push(v);
      }
    }
  }
  return dist;
}

std::string to_edge_list_text(const Graph& g) {
  std::ostringstream out;
  out << "# nodes " << g.node_count() << "\n";
  for (const auto& [u, v] : g.edges()) out << u << " " << v << "\n";
  return out.str();
}

}  // namespace graphtune
