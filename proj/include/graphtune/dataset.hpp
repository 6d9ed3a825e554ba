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
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "graphtune/dfs_code.hpp"
#include "graphtune/features.hpp"
#include "graphtune/graph.hpp"

namespace graphtune {

struct EdgeListLoad {
  Graph graph;
  std::size_t self_loops_dropped = 0;
  std::size_t duplicates_dropped = 0;
};

/// Parses whitespace-separated "u v" lines; '#' starts a comment line. Node
/// ids are compacted to 0..n-1 in order of first appearance, unless a
/// "# nodes N" header (as written by to_edge_list_text) declares them: then
/// ids are kept as written and nodes without edges stay isolated.
EdgeListLoad parse_edge_list(std::string_view text,
                             const std::string& source = "<memory>");
EdgeListLoad load_edge_list(const std::filesystem::path& path);

struct SamplingOptions {
  std::size_t count = 2000;
  int size_min = 10;
  int size_max = 50;
  std::uint64_t seed = 0;
  int retry_budget = 100;
};

/// Random-walk induced subgraphs: pick a uniform start node and a uniform
/// target size, walk until that many distinct nodes are collected, then take
/// the induced subgraph. Attempts that stall are retried.
std::vector<Graph> sample_induced_subgraphs(const Graph& g,
                                            const SamplingOptions& options);

struct ManifestRecord {
  Graph graph;
  DfsCode code;
  FeatureVector features;
};

struct DatasetManifest {
  std::vector<ManifestRecord> records;
  std::vector<Feature> feature_order;
  int max_nodes = 0;
  int max_sequence_length = 0;
};

struct SkippedGraph {
  std::size_t index;
  std::string reason;
};

struct ManifestBuild {
  DatasetManifest manifest;
  std::vector<SkippedGraph> skipped;
};

/// Value plus 10% headroom, rounded up.
int with_headroom(int value);

/// Encodes every graph and computes its features. Graphs that cannot be
/// encoded or fail a metric precondition are skipped and reported. Throws
/// EmptyDatasetError when nothing usable remains.
ManifestBuild build_manifest(std::span<const Graph> graphs,
                             std::span<const Feature> feature_order);

/// Token form of a record under the manifest's max_nodes.
TokenSequence record_tokens(const DatasetManifest& manifest,
                            const ManifestRecord& record);

/// One JSON object per line: nodes, edges, code text, features.
std::string manifest_text(const DatasetManifest& manifest);
std::string manifest_summary_text(const DatasetManifest& manifest,
                                  std::size_t skipped = 0);
std::filesystem::path summary_path(const std::filesystem::path& manifest_path);

/// Writes the manifest and its ".summary.json" sidecar.
void write_manifest(const DatasetManifest& manifest,
                    const std::filesystem::path& path, std::size_t skipped = 0);
DatasetManifest read_manifest(const std::filesystem::path& path);

// ---------------------------------------------------------------------------
// Synthetic graphs (test fixtures and desk-scale corpora).

Graph path_graph(int n);
Graph cycle_graph(int n);
Graph complete_graph(int n);
Graph star_graph(int leaves);
Graph erdos_renyi(int n, double p, std::uint64_t seed);
/// Ring lattice with k nearest neighbours (k even), each edge rewired with
/// probability p.
Graph watts_strogatz(int n, int k, double p, std::uint64_t seed);
/// Random spanning tree plus each remaining pair with probability p.
Graph random_connected_graph(int n, double p, std::uint64_t seed);

struct MixtureOptions {
  std::size_t count = 500;
  int nodes_min = 8;
  int nodes_max = 16;
  double aspl_min = 1.2;
  double aspl_max = 4.5;
  std::size_t max_edges = 40;
  std::uint64_t seed = 0;
};

/// Connected graphs drawn round-robin from paths, cycles, Watts-Strogatz and
/// Erdos-Renyi families, kept only if ASPL and edge count are in range.
std::vector<Graph> synthetic_mixture(const MixtureOptions& options);

}  // namespace graphtune
