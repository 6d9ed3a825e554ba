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

#include "graphtune/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

namespace graphtune {

static_assert(std::endian::native == std::endian::little,
              "checkpoint I/O assumes a little-endian host");

namespace {

using nlohmann::ordered_json;

constexpr char kMagic[4] = {'G', 'T', 'C', 'K'};

template <typename T>
void put(std::string& out, T v) {
  char buf[sizeof(T)];
  std::memcpy(buf, &v, sizeof(T));
  out.append(buf, sizeof(T));
}

class Reader {
 public:
  Reader(const std::string& bytes, std::string source)
      : bytes_(bytes), source_(std::move(source)) {}

  template <typename T>
  T get() {
    T v;
    std::memcpy(&v, take(sizeof(T)), sizeof(T));
    return v;
  }
  std::string get_string(std::size_t n) { return std::string(take(n), n); }
  const char* take(std::size_t n) {
    if (n > bytes_.size() - pos_) fail("truncated");
    const char* p = bytes_.data() + pos_;
    pos_ += n;
    return p;
  }
  bool done() const { return pos_ == bytes_.size(); }
  [[noreturn]] void fail(const std::string& what) const {
    throw FormatError(source_ + ": " + what);
  }

 private:
  const std::string& bytes_;
  std::string source_;
  std::size_t pos_ = 0;
};

ordered_json model_json(const ModelConfig& c) {
  ordered_json j;
  j["latent_dim"] = c.latent_dim;
  j["encoder_hidden"] = c.encoder_hidden;
  j["decoder_hidden"] = c.decoder_hidden;
  j["embedding_dim"] = c.embedding_dim;
  j["estimator_pre_fc"] = c.estimator_pre_fc;
  j["estimator_hidden"] = c.estimator_hidden;
  j["estimator_out"] = c.estimator_out;
  j["condition_dim"] = c.condition_dim;
  j["max_nodes"] = c.max_nodes;
  j["max_sequence_length"] = c.max_sequence_length;
  j["kl_weight"] = c.kl_weight;
  j["kl_anneal_fraction"] = c.kl_anneal_fraction;
  return j;
}

ModelConfig model_from(const ordered_json& j) {
  ModelConfig c;
  c.latent_dim = j.at("latent_dim");
  c.encoder_hidden = j.at("encoder_hidden");
  c.decoder_hidden = j.at("decoder_hidden");
  c.embedding_dim = j.at("embedding_dim");
  c.estimator_pre_fc = j.at("estimator_pre_fc");
  c.estimator_hidden = j.at("estimator_hidden");
  c.estimator_out = j.at("estimator_out");
  c.condition_dim = j.at("condition_dim");
  c.max_nodes = j.at("max_nodes");
  c.max_sequence_length = j.at("max_sequence_length");
  c.kl_weight = j.at("kl_weight");
  c.kl_anneal_fraction = j.at("kl_anneal_fraction");
  return c;
}

ordered_json train_json(const TrainConfig& c) {
  ordered_json j;
  j["batch_size"] = c.batch_size;
  j["graphtune_epochs_per_phase"] = c.graphtune_epochs_per_phase;
  j["estimator_epochs_per_phase"] = c.estimator_epochs_per_phase;
  j["alternate_iterations"] = c.alternate_iterations;
  j["learning_rate"] = c.learning_rate;
  j["seed"] = c.seed;
  j["feature_loss_weight"] = c.feature_loss_weight;
  j["grad_clip_norm"] = c.grad_clip_norm;
  return j;
}

TrainConfig train_from(const ordered_json& j) {
  TrainConfig c;
  c.batch_size = j.at("batch_size");
  c.graphtune_epochs_per_phase = j.at("graphtune_epochs_per_phase");
  c.estimator_epochs_per_phase = j.at("estimator_epochs_per_phase");
  c.alternate_iterations = j.at("alternate_iterations");
  c.learning_rate = j.at("learning_rate");
  c.seed = j.at("seed");
  c.feature_loss_weight = j.at("feature_loss_weight");
  c.grad_clip_norm = j.at("grad_clip_norm");
  return c;
}

enum class Kind : std::uint8_t { kParam = 0, kFirstMoment = 1, kSecondMoment = 2 };

}  // namespace

std::string checkpoint_bytes(const TrainCheckpoint& ck) {
  ordered_json header;
  header["model"] = model_json(ck.model);
  header["train"] = train_json(ck.train);
  std::vector<std::string> names;
  for (Feature f : ck.feature_order) names.emplace_back(feature_name(f));
  header["feature_order"] = names;
  header["standardizer"] = {{"mean", ck.standardizer.mean},
                            {"scale", ck.standardizer.scale}};
  header["state"] = {{"phases_completed", ck.state.phases_completed},
                     {"graphtune_steps", ck.state.graphtune_steps},
                     {"adam_steps", ck.state.adam.steps}};
  const std::string text = header.dump();

  std::string out(kMagic, 4);
  put<std::uint32_t>(out, kCheckpointVersion);
  put<std::uint64_t>(out, text.size());
  out += text;

  const bool has_adam = ck.state.adam.first.size() == ck.params.size();
  put<std::uint32_t>(out, static_cast<std::uint32_t>(ck.params.size() * (has_adam ? 3 : 1)));
  auto array = [&](ParamId id, Kind kind, const Matrix& m) {
    const std::string& name = ck.params.name(id);
    put<std::uint32_t>(out, static_cast<std::uint32_t>(name.size()));
    out += name;
    put<std::uint8_t>(out, static_cast<std::uint8_t>(ck.params.owner(id)));
    put<std::uint8_t>(out, static_cast<std::uint8_t>(kind));
    put<std::uint32_t>(out, static_cast<std::uint32_t>(m.rows()));
    put<std::uint32_t>(out, static_cast<std::uint32_t>(m.cols()));
    out.append(reinterpret_cast<const char*>(m.data()),
               static_cast<std::size_t>(m.size()) * sizeof(double));
  };
  for (ParamId id = 0; id < ck.params.size(); ++id) {
    array(id, Kind::kParam, ck.params.value(id));
    if (has_adam) {
      array(id, Kind::kFirstMoment, ck.state.adam.first[id]);
      array(id, Kind::kSecondMoment, ck.state.adam.second[id]);
    }
  }
  return out;
}

TrainCheckpoint parse_checkpoint(const std::string& bytes, const std::string& source) {
  Reader in(bytes, source);
  if (bytes.size() < 4 || std::memcmp(in.take(4), kMagic, 4) != 0) {
    in.fail("not a graphtune checkpoint");
  }
  const auto version = in.get<std::uint32_t>();
  if (version != kCheckpointVersion) {
    in.fail("unsupported checkpoint version " + std::to_string(version));
  }
  const auto header_bytes = in.get<std::uint64_t>();
  TrainCheckpoint ck;
  try {
    const auto header = ordered_json::parse(in.get_string(header_bytes));
    ck.model = model_from(header.at("model"));
    ck.train = train_from(header.at("train"));
    for (const auto& name : header.at("feature_order")) {
      ck.feature_order.push_back(parse_feature(name.get<std::string>()));
    }
    ck.standardizer.mean = header.at("standardizer").at("mean").get<std::vector<double>>();
    ck.standardizer.scale = header.at("standardizer").at("scale").get<std::vector<double>>();
    const auto& state = header.at("state");
    ck.state.phases_completed = state.at("phases_completed");
    ck.state.graphtune_steps = state.at("graphtune_steps");
    ck.state.adam.steps = state.at("adam_steps").get<std::array<long long, 3>>();
  } catch (const nlohmann::json::exception& e) {
    in.fail(std::string("bad header: ") + e.what());
  } catch (const ConfigError& e) {
    in.fail(std::string("bad header: ") + e.what());
  }
  try {
    ck.model.validate();
    ck.train.validate();
  } catch (const ConfigError& e) {
    in.fail(e.what());
  }
  if (ck.feature_order.size() != static_cast<std::size_t>(ck.model.condition_dim) ||
      ck.standardizer.mean.size() != ck.feature_order.size() ||
      ck.standardizer.scale.size() != ck.feature_order.size()) {
    in.fail("feature order, standardizer and condition_dim disagree");
  }

  const auto count = in.get<std::uint32_t>();
  std::vector<Matrix> first, second;
  for (std::uint32_t a = 0; a < count; ++a) {
    const std::string name = in.get_string(in.get<std::uint32_t>());
    const auto owner = in.get<std::uint8_t>();
    const auto kind = in.get<std::uint8_t>();
    const auto rows = in.get<std::uint32_t>();
    const auto cols = in.get<std::uint32_t>();
    if (owner > 2 || kind > 2) in.fail("bad tag on array " + name);
    const std::size_t n = static_cast<std::size_t>(rows) * cols;
    if (n > bytes.size() / sizeof(double)) in.fail("array " + name + " too large");
    Matrix m(rows, cols);
    std::memcpy(m.data(), in.take(n * sizeof(double)), n * sizeof(double));
    switch (static_cast<Kind>(kind)) {
      case Kind::kParam: {
        const ParamId id = ck.params.add(name, static_cast<Owner>(owner), rows, cols);
        ck.params.value(id) = std::move(m);
        break;
      }
      case Kind::kFirstMoment:
        first.push_back(std::move(m));
        break;
      case Kind::kSecondMoment:
        second.push_back(std::move(m));
        break;
    }
  }
  if (!in.done()) in.fail("trailing bytes");
  try {
    GraphTuneModel(ck.model).check_layout(ck.params);
  } catch (const ConfigError& e) {
    in.fail(e.what());
  }
  if (first.empty() && second.empty()) {
    ck.state.adam = AdamState::zeros_like(ck.params);
  } else if (first.size() == ck.params.size() && second.size() == ck.params.size()) {
    for (ParamId id = 0; id < ck.params.size(); ++id) {
      const Matrix& p = ck.params.value(id);
      if (first[id].rows() != p.rows() || first[id].cols() != p.cols() ||
          second[id].rows() != p.rows() || second[id].cols() != p.cols()) {
        in.fail("optimizer state shape mismatch for " + ck.params.name(id));
      }
    }
    ck.state.adam.first = std::move(first);
    ck.state.adam.second = std::move(second);
  } else {
    in.fail("incomplete optimizer state");
  }
  return ck;
}

void save_checkpoint(const TrainCheckpoint& checkpoint,
                     const std::filesystem::path& path) {
  const std::string bytes = checkpoint_bytes(checkpoint);
  std::ofstream out(path, std::ios::binary);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw FormatError("cannot write checkpoint " + path.string());
}

TrainCheckpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open checkpoint " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_checkpoint(buf.str(), path.string());
}

}  // namespace graphtune
