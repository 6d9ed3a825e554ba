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

#include "graphtune/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <optional>
#include <random>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include <nlohmann/json.hpp>

#include "graphtune/error.hpp"

namespace graphtune {

using nlohmann::json;

namespace {

bool parse_int(std::string_view token, long long& out) {
  auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), out);
  return ec == std::errc() && ptr == token.data() + token.size();
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IngestError(path.string(), 0, "cannot open file");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

}  // namespace

EdgeListLoad parse_edge_list(std::string_view text, const std::string& source) {
  struct RawEdge {
    long long u, v;
    std::size_t line;
  };
  std::vector<RawEdge> raw;
  std::optional<long long> declared_nodes;

  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;

    std::istringstream fields{std::string(line)};
    std::string a, b, extra;
    if (!(fields >> a)) continue;
    if (a[0] == '#') {
      std::string key;
      std::istringstream header{std::string(line.substr(line.find('#') + 1))};
      long long n = 0;
      if (header >> key && key == "nodes" && header >> n && n >= 0) {
        declared_nodes = n;
      }
      continue;
    }
    long long u = 0, v = 0;
    if (!(fields >> b) || (fields >> extra) || !parse_int(a, u) ||
        !parse_int(b, v)) {
      throw IngestError(source, line_no, "expected two integer node ids");
    }
    raw.push_back({u, v, line_no});
  }

  // A "# nodes N" header (written by to_edge_list_text) means ids are already
  // 0..N-1, isolated nodes included. Otherwise compact by first appearance.
  std::unordered_map<long long, NodeId> ids;
  auto intern = [&](long long key) {
    return ids.try_emplace(key, static_cast<NodeId>(ids.size())).first->second;
  };
  std::vector<Edge> edges;
  edges.reserve(raw.size());
  for (const auto& e : raw) {
    if (declared_nodes) {
      if (e.u < 0 || e.v < 0 || e.u >= *declared_nodes || e.v >= *declared_nodes) {
        throw IngestError(source, e.line, "node id outside the declared node count");
      }
      edges.emplace_back(static_cast<NodeId>(e.u), static_cast<NodeId>(e.v));
    } else {
      const NodeId u = intern(e.u);
      const NodeId v = intern(e.v);
      edges.emplace_back(u, v);
    }
  }

  const int n = declared_nodes ? static_cast<int>(*declared_nodes)
                               : static_cast<int>(ids.size());
  EdgeListLoad out{Graph(n)};
  for (const auto& [u, v] : edges) {
    if (u == v) {
      ++out.self_loops_dropped;
    } else if (!out.graph.add_edge(u, v)) {
      ++out.duplicates_dropped;
    }
  }
  return out;
}

EdgeListLoad load_edge_list(const std::filesystem::path& path) {
  return parse_edge_list(read_file(path), path.string());
}

std::vector<Graph> sample_induced_subgraphs(const Graph& g,
                                            const SamplingOptions& options) {
  if (options.size_min < 1 || options.size_max < options.size_min) {
    throw ConfigError("invalid subgraph size bounds");
  }
  std::vector<Graph> out;
  if (options.count == 0) return out;
  if (g.node_count() == 0) {
    throw SamplingExhaustedError("cannot sample from an empty graph");
  }
  std::mt19937_64 rng(options.seed);
  std::uniform_int_distribution<NodeId> start_dist(0, g.node_count() - 1);
  std::uniform_int_distribution<int> size_dist(options.size_min,
                                               options.size_max);

  out.reserve(options.count);
  while (out.size() < options.count) {
    bool produced = false;
    for (int attempt = 0; attempt < options.retry_budget && !produced; ++attempt) {
      const int target = size_dist(rng);
      NodeId current = start_dist(rng);
      std::vector<NodeId> collected{current};
      std::unordered_set<NodeId> members{current};
      const long long walk_budget = 100LL * target;
      for (long long step = 0;
           step < walk_budget && static_cast<int>(collected.size()) < target;
           ++step) {
        const auto& nb = g.neighbors(current);
        if (nb.empty()) break;
        std::uniform_int_distribution<std::size_t> pick(0, nb.size() - 1);
        current = nb[pick(rng)];
        if (members.insert(current).second) collected.push_back(current);
      }
      if (static_cast<int>(collected.size()) != target) continue;
      Graph sub = g.induced(collected);
      if (!sub.is_connected()) continue;
      out.push_back(std::move(sub));
      produced = true;
    }
    if (!produced) {
      throw SamplingExhaustedError(
          "no valid subgraph after " + std::to_string(options.retry_budget) +
          " attempts (sample " + std::to_string(out.size()) + ")");
    }
  }
  return out;
}

int with_headroom(int value) { return (11 * value + 9) / 10; }

ManifestBuild build_manifest(std::span<const Graph> graphs,
                             std::span<const Feature> feature_order) {
  ManifestBuild build;
  DatasetManifest& m = build.manifest;
  m.feature_order.assign(feature_order.begin(), feature_order.end());
  int max_nodes = 0;
  int max_steps = 0;
  for (std::size_t i = 0; i < graphs.size(); ++i) {
    try {
      ManifestRecord record{graphs[i], encode(graphs[i]),
                            compute_features(graphs[i], feature_order)};
      max_nodes = std::max(max_nodes, graphs[i].node_count());
      max_steps = std::max(max_steps, static_cast<int>(record.code.size()) + 1);
      m.records.push_back(std::move(record));
    } catch (const NotEncodableError& e) {
      build.skipped.push_back({i, e.what()});
    } catch (const UndefinedMetricError& e) {
      build.skipped.push_back({i, e.what()});
    }
  }
  if (m.records.empty()) {
    throw EmptyDatasetError("no usable graphs (" +
                            std::to_string(build.skipped.size()) + " skipped)");
  }
  m.max_nodes = with_headroom(max_nodes);
  m.max_sequence_length = with_headroom(max_steps);
  return build;
}

TokenSequence record_tokens(const DatasetManifest& manifest,
                            const ManifestRecord& record) {
  return to_tokens(record.code, manifest.max_nodes);
}

std::string manifest_text(const DatasetManifest& manifest) {
  std::string out;
  for (const auto& r : manifest.records) {
    json line;
    line["nodes"] = r.graph.node_count();
    json edges = json::array();
    for (const auto& [u, v] : r.graph.edges()) edges.push_back({u, v});
    line["edges"] = std::move(edges);
    line["code"] = to_text(r.code);
    json features = json::array();
    for (std::size_t i = 0; i < r.features.size(); ++i) {
      features.push_back({feature_name(r.features.names()[i]), r.features.value(i)});
    }
    line["features"] = std::move(features);
    out += line.dump();
    out += '\n';
  }
  return out;
}

std::string manifest_summary_text(const DatasetManifest& manifest,
                                  std::size_t skipped) {
  json summary;
  summary["records"] = manifest.records.size();
  summary["skipped"] = skipped;
  summary["max_nodes"] = manifest.max_nodes;
  summary["max_sequence_length"] = manifest.max_sequence_length;
  json order = json::array();
  for (Feature f : manifest.feature_order) order.push_back(feature_name(f));
  summary["feature_order"] = std::move(order);
  return summary.dump(2) + "\n";
}

std::filesystem::path summary_path(const std::filesystem::path& manifest_path) {
  return std::filesystem::path(manifest_path.string() + ".summary.json");
}

void write_manifest(const DatasetManifest& manifest,
                    const std::filesystem::path& path, std::size_t skipped) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path.string());
    out << manifest_text(manifest);
  }
  std::ofstream out(summary_path(path), std::ios::binary);
  if (!out) throw Error("cannot write " + summary_path(path).string());
  out << manifest_summary_text(manifest, skipped);
}

DatasetManifest read_manifest(const std::filesystem::path& path) {
  DatasetManifest m;
  try {
    const json summary = json::parse(read_file(summary_path(path)));
    m.max_nodes = summary.at("max_nodes").get<int>();
    m.max_sequence_length = summary.at("max_sequence_length").get<int>();
    for (const auto& name : summary.at("feature_order")) {
      m.feature_order.push_back(parse_feature(name.get<std::string>()));
    }

    const std::string text = read_file(path);
    std::istringstream in(text);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      if (line.empty()) continue;
      const json rec = json::parse(line);
      Graph g(rec.at("nodes").get<int>());
      for (const auto& e : rec.at("edges")) {
        if (!g.add_edge(e.at(0).get<int>(), e.at(1).get<int>())) {
          throw IngestError(path.string(), line_no, "duplicate or self-loop edge");
        }
      }
      DfsCode code = parse_code_text(rec.at("code").get<std::string>());
      validate(code);
      std::vector<Feature> names;
      std::vector<double> values;
      for (const auto& f : rec.at("features")) {
        names.push_back(parse_feature(f.at(0).get<std::string>()));
        values.push_back(f.at(1).get<double>());
      }
      if (names != m.feature_order) {
        throw IngestError(path.string(), line_no, "feature order mismatch");
      }
      if (static_cast<int>(code.size()) + 1 > m.max_sequence_length) {
        throw IngestError(path.string(), line_no, "code exceeds max_sequence_length");
      }
      m.records.push_back({std::move(g), std::move(code),
                           FeatureVector(std::move(names), std::move(values))});
    }
  } catch (const json::exception& e) {
    throw IngestError(path.string(), 0, std::string("malformed manifest: ") + e.what());
  }
  if (m.records.empty()) throw EmptyDatasetError("manifest has no records");
  return m;
}

// ---------------------------------------------------------------------------

Graph path_graph(int n) {
  Graph g(n);
  for (int i = 0; i + 1 < n; ++i) g.add_edge(i, i + 1);
  return g;
}

Graph cycle_graph(int n) {
  Graph g = path_graph(n);
  if (n >= 3) g.add_edge(n - 1, 0);
  return g;
}

Graph complete_graph(int n) {
  Graph g(n);
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) g.add_edge(i, j);
  }
  return g;
}

Graph star_graph(int leaves) {
  Graph g(leaves + 1);
  for (int i = 1; i <= leaves; ++i) g.add_edge(0, i);
  return g;
}

Graph erdos_renyi(int n, double p, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::bernoulli_distribution coin(p);
  Graph g(n);
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      if (coin(rng)) g.add_edge(i, j);
    }
  }
  return g;
}

Graph watts_strogatz(int n, int k, double p, std::uint64_t seed) {
  if (k % 2 != 0 || k >= n) throw ConfigError("watts_strogatz needs even k < n");
  std::mt19937_64 rng(seed);
  std::bernoulli_distribution rewire(p);
  std::uniform_int_distribution<int> node(0, n - 1);
  Graph g(n);
  std::vector<Edge> lattice;
  for (int j = 1; j <= k / 2; ++j) {
    for (int i = 0; i < n; ++i) {
      lattice.emplace_back(i, (i + j) % n);
      g.add_edge(i, (i + j) % n);
    }
  }
  for (const auto& [u, v] : lattice) {
    if (!rewire(rng) || g.degree(u) >= n - 1) continue;
    int w = node(rng);
    while (w == u || g.has_edge(u, w)) w = node(rng);
    g.remove_edge(u, v);
    g.add_edge(u, w);
  }
  return g;
}

Graph random_connected_graph(int n, double p, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<NodeId> order(n);
  for (int i = 0; i < n; ++i) order[i] = i;
  std::shuffle(order.begin(), order.end(), rng);
  Graph g(n);
  for (int i = 1; i < n; ++i) {
    std::uniform_int_distribution<int> parent(0, i - 1);
    g.add_edge(order[i], order[parent(rng)]);
  }
  std::bernoulli_distribution coin(p);
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      if (!g.has_edge(i, j) && coin(rng)) g.add_edge(i, j);
    }
  }
  return g;
}

std::vector<Graph> synthetic_mixture(const MixtureOptions& options) {
  std::mt19937_64 rng(options.seed);
  std::uniform_int_distribution<int> size(options.nodes_min, options.nodes_max);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<Graph> out;
  out.reserve(options.count);
  std::size_t family = 0;
  long long attempts = 0;
  while (out.size() < options.count) {
    if (++attempts > 1000LL * static_cast<long long>(options.count) + 1000) {
      throw SamplingExhaustedError("synthetic mixture: acceptance rate too low");
    }
    const int n = size(rng);
    const std::uint64_t sub_seed = rng();
    Graph g;
    switch (family % 4) {
      case 0:
        g = path_graph(n);
        break;
      case 1:
        g = cycle_graph(n);
        break;
      case 2: {
        const int k = unit(rng) < 0.5 || n <= 4 ? 2 : 4;
        const double p = 0.1 + 0.4 * unit(rng);
        g = watts_strogatz(n, k, p, sub_seed);
        break;
      }
      default:
        g = erdos_renyi(n, 0.2 + 0.7 * unit(rng), sub_seed);
        break;
    }
    if (!g.is_connected() || g.edge_count() > options.max_edges) continue;
    const double aspl = average_shortest_path_length(g);
    if (aspl < options.aspl_min || aspl > options.aspl_max) continue;
    out.push_back(std::move(g));
    ++family;
  }
  return out;
}

}  // namespace graphtune
