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

#include "graphtune/cli.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iomanip>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "graphtune/checkpoint.hpp"

namespace graphtune::cli {

namespace fs = std::filesystem;

namespace {

// ---------------------------------------------------------------------------
// Config fields.

std::string format_number(double v) {
  char buf[32];
  auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

template <typename T>
std::string format_number(T v) {
  return std::to_string(v);
}

template <typename T>
T parse_number(const std::string& text, const std::string& where) {
  T v{};
  const char* first = text.data();
  const char* last = text.data() + text.size();
  const auto r = std::from_chars(first, last, v);
  if (r.ec != std::errc() || r.ptr != last) {
    throw ConfigError(where + ": cannot parse '" + text + "'");
  }
  return v;
}

bool parse_bool(const std::string& text, const std::string& where) {
  if (text == "true" || text == "1" || text == "yes") return true;
  if (text == "false" || text == "0" || text == "no") return false;
  throw ConfigError(where + ": expected true or false, got '" + text + "'");
}

std::vector<double> parse_values(const std::string& text, const std::string& where) {
  std::vector<double> out;
  std::stringstream items(text);
  std::string item;
  while (std::getline(items, item, ',')) out.push_back(parse_number<double>(item, where));
  if (out.empty()) throw ConfigError(where + ": empty value list");
  return out;
}

std::string format_values(const std::vector<double>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? "," : "") + format_number(v[i]);
  return out;
}

struct Field {
  std::string section;
  std::string key;
  std::function<void(RunConfig&, const std::string&)> set;
  std::function<std::string(const RunConfig&)> get;
};

template <typename Access>
Field number(std::string section, std::string key, Access access) {
  const std::string where = section + "." + key;
  return {section, key,
          [access, where](RunConfig& c, const std::string& v) {
            auto& ref = access(c);
            ref = parse_number<std::remove_reference_t<decltype(ref)>>(v, where);
          },
          [access](const RunConfig& c) { return format_number(access(c)); }};
}

const std::vector<Field>& fields() {
  static const std::vector<Field> table = [] {
    std::vector<Field> f;
    f.push_back({"dataset", "features",
                 [](RunConfig& c, const std::string& v) { c.features = parse_feature_list(v); },
                 [](const RunConfig& c) { return join_feature_names(c.features); }});
    f.push_back(number("dataset", "sample_count", [](auto& c) -> auto& { return c.sampling.count; }));
    f.push_back(number("dataset", "size_min", [](auto& c) -> auto& { return c.sampling.size_min; }));
    f.push_back(number("dataset", "size_max", [](auto& c) -> auto& { return c.sampling.size_max; }));
    f.push_back(number("dataset", "seed", [](auto& c) -> auto& { return c.sampling.seed; }));
    f.push_back(number("dataset", "retry_budget", [](auto& c) -> auto& { return c.sampling.retry_budget; }));

    f.push_back(number("synthetic", "count", [](auto& c) -> auto& { return c.synthetic.count; }));
    f.push_back(number("synthetic", "nodes_min", [](auto& c) -> auto& { return c.synthetic.nodes_min; }));
    f.push_back(number("synthetic", "nodes_max", [](auto& c) -> auto& { return c.synthetic.nodes_max; }));
    f.push_back(number("synthetic", "aspl_min", [](auto& c) -> auto& { return c.synthetic.aspl_min; }));
    f.push_back(number("synthetic", "aspl_max", [](auto& c) -> auto& { return c.synthetic.aspl_max; }));
    f.push_back(number("synthetic", "max_edges", [](auto& c) -> auto& { return c.synthetic.max_edges; }));
    f.push_back(number("synthetic", "seed", [](auto& c) -> auto& { return c.synthetic.seed; }));

    f.push_back(number("model", "latent_dim", [](auto& c) -> auto& { return c.model.latent_dim; }));
    f.push_back(number("model", "encoder_hidden", [](auto& c) -> auto& { return c.model.encoder_hidden; }));
    f.push_back(number("model", "decoder_hidden", [](auto& c) -> auto& { return c.model.decoder_hidden; }));
    f.push_back(number("model", "embedding_dim", [](auto& c) -> auto& { return c.model.embedding_dim; }));
    f.push_back(number("model", "estimator_pre_fc", [](auto& c) -> auto& { return c.model.estimator_pre_fc; }));
    f.push_back(number("model", "estimator_hidden", [](auto& c) -> auto& { return c.model.estimator_hidden; }));
    f.push_back(number("model", "kl_weight", [](auto& c) -> auto& { return c.model.kl_weight; }));
    f.push_back(number("model", "kl_anneal_fraction", [](auto& c) -> auto& { return c.model.kl_anneal_fraction; }));

    f.push_back(number("train", "batch_size", [](auto& c) -> auto& { return c.train.batch_size; }));
    f.push_back(number("train", "graphtune_epochs_per_phase",
                       [](auto& c) -> auto& { return c.train.graphtune_epochs_per_phase; }));
    f.push_back(number("train", "estimator_epochs_per_phase",
                       [](auto& c) -> auto& { return c.train.estimator_epochs_per_phase; }));
    f.push_back(number("train", "alternate_iterations",
                       [](auto& c) -> auto& { return c.train.alternate_iterations; }));
    f.push_back(number("train", "learning_rate", [](auto& c) -> auto& { return c.train.learning_rate; }));
    f.push_back(number("train", "seed", [](auto& c) -> auto& { return c.train.seed; }));
    f.push_back(number("train", "feature_loss_weight",
                       [](auto& c) -> auto& { return c.train.feature_loss_weight; }));
    f.push_back(number("train", "grad_clip_norm", [](auto& c) -> auto& { return c.train.grad_clip_norm; }));
    f.push_back(number("train", "log_every", [](auto& c) -> auto& { return c.log_every; }));

    f.push_back({"generate", "conditions",
                 [](RunConfig& c, const std::string& v) {
                   c.generate.conditions.clear();
                   std::istringstream items(v);
                   std::string item;
                   while (items >> item) {
                     c.generate.conditions.push_back(parse_values(item, "generate.conditions"));
                   }
                   if (c.generate.conditions.empty()) {
                     throw ConfigError("generate.conditions: no values");
                   }
                 },
                 [](const RunConfig& c) {
                   std::string out;
                   for (const auto& cond : c.generate.conditions) {
                     out += (out.empty() ? "" : " ") + format_values(cond);
                   }
                   return out;
                 }});
    f.push_back(number("generate", "count", [](auto& c) -> auto& { return c.generate.count; }));
    f.push_back(number("generate", "seed", [](auto& c) -> auto& { return c.generate.seed; }));
    f.push_back(number("generate", "temperature", [](auto& c) -> auto& { return c.generate.temperature; }));
    f.push_back({"generate", "argmax",
                 [](RunConfig& c, const std::string& v) {
                   c.generate.argmax = parse_bool(v, "generate.argmax");
                 },
                 [](const RunConfig& c) { return std::string(c.generate.argmax ? "true" : "false"); }});
    f.push_back(number("generate", "retry_factor", [](auto& c) -> auto& { return c.generate.retry_factor; }));
    return f;
  }();
  return table;
}

}  // namespace

RunConfig parse_run_config(const std::string& text) {
  namespace pt = boost::property_tree;
  pt::ptree tree;
  try {
    std::istringstream in(text);
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError("config line " + std::to_string(e.line()) + ": " + e.message());
  }
  RunConfig c;
  for (const auto& [section, keys] : tree) {
    if (keys.empty() && !keys.data().empty()) {
      throw ConfigError("config key '" + section + "' outside a section");
    }
    for (const auto& [key, value] : keys) {
      const auto it = std::find_if(fields().begin(), fields().end(), [&](const Field& f) {
        return f.section == section && f.key == key;
      });
      if (it == fields().end()) throw ConfigError("unknown config key " + section + "." + key);
      it->set(c, value.data());
    }
  }
  c.train.validate();
  if (c.log_every < 1) throw ConfigError("train.log_every must be >= 1");
  return c;
}

RunConfig load_run_config(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read config " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  try {
    return parse_run_config(text.str());
  } catch (const ConfigError& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

std::string run_config_text(const RunConfig& config) {
  std::string out;
  std::string section;
  for (const Field& f : fields()) {
    if (f.section != section) {
      out += (section.empty() ? "[" : "\n[") + f.section + "]\n";
      section = f.section;
    }
    out += f.key + " = " + f.get(config) + "\n";
  }
  return out;
}

std::string condition_dir_name(const std::vector<double>& condition) {
  std::string out = "c";
  for (std::size_t i = 0; i < condition.size(); ++i) {
    out += (i ? "_" : "") + format_number(condition[i]);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Commands.

namespace {

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
  if (!out) throw FormatError("cannot write " + path.string());
}

struct Context {
  std::ostream& out;
  std::ostream& err;
};

RunConfig base_config(const std::string& path) {
  return path.empty() ? RunConfig{} : load_run_config(path);
}

int cmd_sample(const Context& io, RunConfig cfg, const fs::path& corpus,
               const fs::path& out_path) {
  if (cfg.sampling.count == 0) {
    throw EmptyDatasetError("sample count must be >= 1");
  }
  const EdgeListLoad load = load_edge_list(corpus);
  if (load.self_loops_dropped || load.duplicates_dropped) {
    io.err << "ingest: dropped " << load.self_loops_dropped << " self-loops and "
           << load.duplicates_dropped << " duplicate edges\n";
  }
  const std::vector<Graph> graphs = sample_induced_subgraphs(load.graph, cfg.sampling);
  const ManifestBuild build = build_manifest(graphs, cfg.features);
  for (const auto& s : build.skipped) {
    io.err << "skipped subgraph " << s.index << ": " << s.reason << "\n";
  }
  write_manifest(build.manifest, out_path, build.skipped.size());
  io.out << "wrote " << build.manifest.records.size() << " records to " << out_path.string()
         << "\n";
  return kExitOk;
}

int cmd_synth(const Context& io, const RunConfig& cfg, const fs::path& out_path) {
  const std::vector<Graph> graphs = synthetic_mixture(cfg.synthetic);
  const ManifestBuild build = build_manifest(graphs, cfg.features);
  write_manifest(build.manifest, out_path, build.skipped.size());
  io.out << "wrote " << build.manifest.records.size() << " records to " << out_path.string()
         << "\n";
  return kExitOk;
}

int cmd_train(const Context& io, RunConfig cfg, const fs::path& manifest_path,
              const fs::path& out_dir, const std::optional<TrainCheckpoint>& resume) {
  const DatasetManifest manifest = read_manifest(manifest_path);
  cfg.features = manifest.feature_order;
  const ModelConfig mc = configure_for(cfg.model, manifest);
  fs::create_directories(out_dir);
  write_text(out_dir / "config.ini", run_config_text(cfg));

  TrainHooks hooks;
  hooks.resume = resume ? &*resume : nullptr;
  hooks.on_epoch = [&](const EpochRecord& e) {
    if (e.epoch % cfg.log_every != 0) return;
    io.err << "iteration " << e.iteration << " phase " << phase_letter(e.phase) << " epoch "
           << e.epoch;
    auto field = [&](const char* name, const std::optional<double>& v) {
      if (v) io.err << " " << name << "=" << std::setprecision(6) << *v;
    };
    field("reconstruction", e.reconstruction);
    field("kl", e.kl);
    field("feature", e.feature);
    field("estimator", e.estimator);
    io.err << "\n";
  };
  hooks.on_phase_end = [&](const TrainCheckpoint& ck) {
    const int p = ck.state.phases_completed - 1;
    const std::string name = "phase-" + std::to_string(p / 2 + 1) +
                             (p % 2 == 0 ? "A" : "B") + ".ckpt";
    save_checkpoint(ck, out_dir / name);
  };

  try {
    const TrainResult r = train_alternate(manifest, mc, cfg.train, hooks);
    write_text(out_dir / "trace.csv", r.trace.csv());
    save_checkpoint(r.checkpoint, out_dir / "final.ckpt");
  } catch (const DivergenceError& e) {
    write_text(out_dir / "trace.csv", e.trace().csv());
    io.err << "error: training diverged: " << e.what() << "\n";
    return kExitDivergence;
  }
  io.out << "wrote " << (out_dir / "final.ckpt").string() << "\n";
  return kExitOk;
}

int cmd_generate(const Context& io, RunConfig cfg, const fs::path& checkpoint_path,
                 const fs::path& out_dir) {
  const TrainCheckpoint ck = load_checkpoint(checkpoint_path);
  cfg.features = ck.feature_order;
  fs::create_directories(out_dir);
  write_text(out_dir / "config.ini", run_config_text(cfg));

  GenerationOptions opt;
  opt.count = cfg.generate.count;
  opt.seed = cfg.generate.seed;
  opt.temperature = cfg.generate.temperature;
  opt.argmax = cfg.generate.argmax;
  opt.retry_factor = cfg.generate.retry_factor;
  for (const auto& cond : cfg.generate.conditions) {
    const Generated g = generate(ck, cond, opt);
    const fs::path dir = out_dir / condition_dir_name(cond);
    fs::remove_all(dir / "graphs");
    fs::create_directories(dir / "graphs");
    for (std::size_t i = 0; i < g.graphs.size(); ++i) {
      char name[32];
      std::snprintf(name, sizeof name, "graph_%05zu.txt", i);
      write_text(dir / "graphs" / name, to_edge_list_text(g.graphs[i]));
    }
    write_report(g.report, dir);
    io.out << condition_dir_name(cond) << ": " << g.report.produced << "/"
           << g.report.requested << " graphs, validity " << g.report.validity_rate;
    if (g.report.evaluation) {
      for (const auto& s : g.report.evaluation->summary) {
        io.out << ", " << feature_name(s.feature) << " mean " << s.mean << " mae " << s.mae;
      }
    }
    io.out << "\n";
    if (g.report.warning) io.err << "warning: " << condition_dir_name(cond) << ": "
                                 << *g.report.warning << "\n";
  }
  return kExitOk;
}

std::vector<Graph> load_graph_dir(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw IngestError(dir.string(), 0, "not a directory");
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".txt") {
      files.push_back(entry.path());
    }
  }
  std::sort(files.begin(), files.end());
  if (files.empty()) throw IngestError(dir.string(), 0, "no edge-list (.txt) files");
  std::vector<Graph> graphs;
  for (const auto& f : files) graphs.push_back(load_edge_list(f).graph);
  return graphs;
}

std::string dir_label(const fs::path& dir) {
  std::string label = dir.lexically_normal().generic_string();
  while (!label.empty() && label.back() == '/') label.pop_back();
  std::replace(label.begin(), label.end(), '/', '_');
  std::erase_if(label, [](char ch) { return ch == '.'; });
  while (!label.empty() && label.front() == '_') label.erase(label.begin());
  return label.empty() ? "graphs" : label;
}

int cmd_evaluate(const Context& io, const RunConfig& cfg, const std::vector<fs::path>& dirs,
                 const std::vector<double>& targets, const fs::path& out_dir) {
  if (targets.size() != cfg.features.size()) {
    throw ConfigError("need one target per feature (" + join_feature_names(cfg.features) + ")");
  }
  fs::create_directories(out_dir);
  std::string table = "label,feature,target,scored,mean,std,mae\n";
  std::map<std::string, int> seen;
  for (const auto& dir : dirs) {
    const std::vector<Graph> graphs = load_graph_dir(dir);
    const Evaluation e = evaluate(graphs, cfg.features, targets);
    std::vector<Kde> kdes;
    for (std::size_t f = 0; f < cfg.features.size(); ++f) {
      std::vector<double> v;
      for (const auto& fv : e.features) v.push_back(fv.value(f));
      kdes.push_back(kde(v));
    }
    std::string label = dir_label(dir);
    if (const int n = seen[label]++; n > 0) label += "-" + std::to_string(n);
    const fs::path sub = out_dir / label;
    fs::create_directories(sub);
    write_text(sub / "features.csv", features_csv(e));
    write_text(sub / "kde.csv", kde_csv(cfg.features, kdes));
    write_text(sub / "summary.json", evaluation_json(e, kdes));
    for (const auto& s : e.summary) {
      table += label + "," + std::string(feature_name(s.feature)) + "," +
               format_number(s.target) + "," + std::to_string(e.features.size()) + "," +
               format_number(s.mean) + "," + format_number(s.std) + "," +
               format_number(s.mae) + "\n";
    }
  }
  write_text(out_dir / "comparison.csv", table);
  io.out << table;
  return kExitOk;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  const Context io{out, err};
  CLI::App app{"Feature-conditioned graph generation with estimator feedback", "graphtune"};
  app.require_subcommand(1);
  app.fallthrough();
  std::string config_path;
  app.add_option("--config", config_path, "INI run configuration")->check(CLI::ExistingFile);

  // sample
  auto* sample = app.add_subcommand("sample", "Sample induced subgraphs into a manifest");
  std::string corpus, sample_out, sample_features;
  std::optional<std::size_t> sample_count;
  std::optional<int> size_min, size_max;
  std::optional<std::uint64_t> sample_seed;
  sample->add_option("--corpus", corpus, "Edge-list file")->required();
  sample->add_option("--out", sample_out, "Manifest path")->required();
  sample->add_option("--count", sample_count, "Number of subgraphs");
  sample->add_option("--size-min", size_min, "Minimum subgraph size");
  sample->add_option("--size-max", size_max, "Maximum subgraph size");
  sample->add_option("--seed", sample_seed, "Sampling seed");
  sample->add_option("--features", sample_features, "Comma-separated feature list");

  // synth
  auto* synth = app.add_subcommand("synth", "Build a manifest of synthetic graphs");
  std::string synth_out, synth_features;
  std::optional<std::size_t> synth_count;
  std::optional<std::uint64_t> synth_seed;
  synth->add_option("--out", synth_out, "Manifest path")->required();
  synth->add_option("--count", synth_count, "Number of graphs");
  synth->add_option("--seed", synth_seed, "Generator seed");
  synth->add_option("--features", synth_features, "Comma-separated feature list");

  // train
  auto* train = app.add_subcommand("train", "Alternate training");
  std::string manifest_path, train_out, resume_path;
  std::optional<std::uint64_t> train_seed;
  std::optional<double> feature_weight;
  train->add_option("--manifest", manifest_path, "Manifest path")->required();
  train->add_option("--out", train_out, "Output directory")->required();
  train->add_option("--resume", resume_path, "Phase checkpoint to continue from");
  train->add_option("--seed", train_seed, "Training seed");
  train->add_option("--feature-weight", feature_weight,
                    "Estimator feedback weight (0 = no feedback)");

  // generate
  auto* gen = app.add_subcommand("generate", "Generate graphs at given conditions");
  std::string checkpoint_path, gen_out;
  std::vector<std::string> conditions;
  std::optional<std::size_t> gen_count;
  std::optional<std::uint64_t> gen_seed;
  std::optional<double> temperature;
  bool argmax = false;
  gen->add_option("--checkpoint", checkpoint_path, "Checkpoint file")->required();
  gen->add_option("--out", gen_out, "Output directory")->required();
  gen->add_option("--condition", conditions,
                  "Raw condition value (comma list for several features); repeatable");
  gen->add_option("--count", gen_count, "Graphs per condition");
  gen->add_option("--seed", gen_seed, "Sampling seed");
  auto* temp_opt = gen->add_option("--temperature", temperature, "Sampling temperature");
  gen->add_flag("--argmax", argmax, "Greedy decoding")->excludes(temp_opt);

  // evaluate
  auto* eval = app.add_subcommand("evaluate", "Score directories of edge-list graphs");
  std::vector<std::string> eval_dirs;
  std::string eval_out, eval_target, eval_features;
  eval->add_option("--dir", eval_dirs, "Graph directory; repeatable")->required();
  eval->add_option("--target", eval_target, "Target value(s), one per feature")->required();
  eval->add_option("--features", eval_features, "Comma-separated feature list");
  eval->add_option("--out", eval_out, "Output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    RunConfig cfg = base_config(config_path);
    if (*sample) {
      if (sample_count) cfg.sampling.count = *sample_count;
      if (size_min) cfg.sampling.size_min = *size_min;
      if (size_max) cfg.sampling.size_max = *size_max;
      if (sample_seed) cfg.sampling.seed = *sample_seed;
      if (!sample_features.empty()) cfg.features = parse_feature_list(sample_features);
      return cmd_sample(io, cfg, corpus, sample_out);
    }
    if (*synth) {
      if (synth_count) cfg.synthetic.count = *synth_count;
      if (synth_seed) cfg.synthetic.seed = *synth_seed;
      if (!synth_features.empty()) cfg.features = parse_feature_list(synth_features);
      return cmd_synth(io, cfg, synth_out);
    }
    if (*train) {
      std::optional<TrainCheckpoint> resume;
      if (!resume_path.empty()) {
        resume = load_checkpoint(resume_path);
        if (config_path.empty()) {
          cfg.model = resume->model;
          cfg.train = resume->train;
        }
      }
      if (train_seed) cfg.train.seed = *train_seed;
      if (feature_weight) cfg.train.feature_loss_weight = *feature_weight;
      cfg.train.validate();
      return cmd_train(io, cfg, manifest_path, train_out, resume);
    }
    if (*gen) {
      if (!conditions.empty()) {
        cfg.generate.conditions.clear();
        for (const auto& c : conditions) {
          cfg.generate.conditions.push_back(parse_values(c, "--condition"));
        }
      }
      if (gen_count) cfg.generate.count = *gen_count;
      if (gen_seed) cfg.generate.seed = *gen_seed;
      if (temperature) cfg.generate.temperature = *temperature;
      if (argmax) cfg.generate.argmax = true;
      return cmd_generate(io, cfg, checkpoint_path, gen_out);
    }
    if (!eval_features.empty()) cfg.features = parse_feature_list(eval_features);
    std::vector<fs::path> dirs(eval_dirs.begin(), eval_dirs.end());
    return cmd_evaluate(io, cfg, dirs, parse_values(eval_target, "--target"), eval_out);
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const DivergenceError& e) {
    err << "error: " << e.what() << "\n";
    return kExitDivergence;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitData;
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << "\n";
    return kExitData;
  }
}

}  // namespace graphtune::cli
