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
#include <utility>
#include <vector>

namespace graphtune {

using NodeId = int;
using Edge = std::pair<NodeId, NodeId>;

/// Undirected simple graph over nodes 0..node_count-1. Edges are stored
/// canonically (smaller id first) and sorted, so two graphs with the same
/// edge set compare equal.
class Graph {
 public:
  Graph() = default;
  explicit Graph(int node_count);

  /// Builds a graph from an edge list. Throws InvalidGraphError on self-loops,
  /// duplicates (in either orientation) or out-of-range ids.
  static Graph from_edges(int node_count, std::span<const Edge> edges);

  /// Adds {u, v}. Returns false and leaves the graph unchanged when the edge
  /// is a self-loop or already present; throws on out-of-range ids.
  bool add_edge(NodeId u, NodeId v);
  /// Returns false if {u, v} is absent.
  bool remove_edge(NodeId u, NodeId v);

  int node_count() const { return node_count_; }
  std::size_t edge_count() const { return edges_.size(); }
  const std::vector<Edge>& edges() const { return edges_; }
  const std::vector<NodeId>& neighbors(NodeId u) const { return adjacency_[u]; }
  int degree(NodeId u) const { return static_cast<int>(adjacency_[u].size()); }
  bool has_edge(NodeId u, NodeId v) const;

  /// Connected components, each sorted ascending; components are ordered by
  /// their smallest node id.
  std::vector<std::vector<NodeId>> components() const;
  bool is_connected() const;

  /// Subgraph induced by `nodes`; node i of the result is nodes[i].
  Graph induced(std::span<const NodeId> nodes) const;

  /// Graph with node u renamed to permutation[u].
  Graph relabeled(std::span<const NodeId> permutation) const;

  friend bool operator==(const Graph& a, const Graph& b) {
    return a.node_count_ == b.node_count_ && a.edges_ == b.edges_;
  }

 private:
  int node_count_ = 0;
  std::vector<Edge> edges_;
  std::vector<std::vector<NodeId>> adjacency_;
};

/// Largest connected component, relabeled to 0..k-1 in ascending original id
/// order. Ties go to the component with the smallest minimum node id.
Graph largest_component(const Graph& g);

/// Hop distances from `source`; unreachable nodes get -1.
std::vector<int> bfs_distances(const Graph& g, NodeId source);

/// Writes "u v" lines; reading is done by load_edge_list in dataset.hpp.
std::string to_edge_list_text(const Graph& g);

}  // namespace graphtune
