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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <numbers>

#include "../gradcheck.hpp"
#include "graphtune/checkpoint.hpp"
#include "graphtune/dataset.hpp"
#include "graphtune/training.hpp"

using namespace graphtune;
using namespace graphtune::testing;

namespace {

const double kLn2 = std::numbers::ln2;

DatasetManifest toy_manifest(std::size_t count, std::uint64_t seed) {
  MixtureOptions mix;
  mix.count = count;
  mix.nodes_min = 4;
  mix.nodes_max = 6;
  mix.aspl_min = 1.0;
  mix.aspl_max = 3.0;
  mix.seed = seed;
  const std::vector<Feature> order{Feature::kAspl};
  return build_manifest(synthetic_mixture(mix), order).manifest;
}

ModelConfig toy_model(const DatasetManifest& m) {
  ModelConfig c = tiny_config();
  return configure_for(c, m);
}

TrainConfig toy_train() {
  TrainConfig t;
  t.batch_size = 8;
  t.graphtune_epochs_per_phase = 3;
  t.estimator_epochs_per_phase = 4;
  t.alternate_iterations = 2;
  t.learning_rate = 1e-2;
  t.seed = 5;
  return t;
}

SoftSequence uniform_like(const TokenSequence& t) {
  SoftSequence s = SoftSequence::one_hot(t);
  for (auto& step : s.steps) {
    for (auto& v : step) v.setConstant(1.0 / static_cast<double>(v.size()));
  }
  return s;
}

}  // namespace

TEST_CASE("reconstruction loss closed forms") {
  const TokenSequence t = to_tokens(encode(path_graph(3)), 1 + 2);
  CHECK(reconstruction_loss(SoftSequence::one_hot(t), t) == 0.0);

  SUBCASE("uniform prediction") {
    // max_nodes = 1 makes every slot binary: L * S * ln 2.
    TokenSequence binary{1, {{0, 0, 0, 0, 0}, end_step(1)}};
    const double expected = 2.0 * kTokenSlots * kLn2;
    CHECK(reconstruction_loss(uniform_like(binary), binary) == doctest::Approx(expected).epsilon(1e-14));
    // Mixed vocabularies: sum of ln V_s per step.
    const VocabSizes v = token_vocab_sizes(3);
    double per_step = 0.0;
    for (int s = 0; s < kTokenSlots; ++s) per_step += std::log(v[s]);
    CHECK(reconstruction_loss(uniform_like(t), t) ==
          doctest::Approx(static_cast<double>(t.size()) * per_step).epsilon(1e-14));
  }
  SUBCASE("one uncertain binary slot") {
    SoftSequence s = SoftSequence::one_hot(t);
    s.steps[0][kEdgeLabel].setConstant(0.5);
    CHECK(reconstruction_loss(s, t) == doctest::Approx(kLn2).epsilon(1e-14));
  }
  TokenSequence shorter = t;
  shorter.steps.pop_back();
  CHECK_THROWS_AS(reconstruction_loss(SoftSequence::one_hot(t), shorter), ContractError);
}

TEST_CASE("kl loss closed forms") {
  const auto kl = [](const Vector& mu, const Vector& logvar) { return kl_loss(mu, logvar); };
  CHECK(kl(Vector::Zero(3), Vector::Zero(3)) == 0.0);
  CHECK(kl(Vector::Ones(1), Vector::Zero(1)) == doctest::Approx(0.5).epsilon(1e-15));
  const double v = kl(Vector::Zero(1), Vector::Constant(1, kLn2));
  CHECK(v == doctest::Approx(0.5 * (1.0 - kLn2)).epsilon(1e-14));
  CHECK(v == doctest::Approx(0.1534).epsilon(1e-3));
  // Batched form averages over columns.
  Matrix mu(1, 2);
  mu << 1.0, 0.0;
  CHECK(kl_loss(mu, Matrix::Zero(1, 2)) == doctest::Approx(0.25));
  CHECK(kl(Vector::Constant(2, 0.3), Vector::Constant(2, -0.2)) > 0.0);
}

TEST_CASE("feature loss") {
  const std::vector<Feature> order{Feature::kAspl};
  CHECK(feature_loss(FeatureVector(order, {3.0}), FeatureVector(order, {3.0})) == 0.0);
  CHECK(feature_loss(FeatureVector(order, {3.0}), FeatureVector(order, {4.0})) == 1.0);
  Matrix est(1, 2), truth(1, 2);
  est << 2.0, 4.0;
  truth << 3.0, 3.0;
  CHECK(feature_loss(est, truth) == 1.0);
  const std::vector<Feature> other{Feature::kClustering};
  CHECK_THROWS_AS(feature_loss(FeatureVector(order, {1.0}), FeatureVector(other, {1.0})),
                  ContractError);
}

TEST_CASE("phase losses enforce freezing") {
  const ModelConfig c = tiny_config();
  const GraphTuneModel model(c);
  ModelParams p = model.init_params(1);
  const TrainingBatch batch = tiny_batch(c.max_nodes);
  const Matrix noise = fixed_noise(c.latent_dim, 3, 1);

  CHECK_THROWS_AS(graphtune_phase_loss(model, p, batch, {}, noise), TrainingContractError);
  CHECK_THROWS_AS(estimator_phase_loss(model, p, batch, noise), TrainingContractError);
  p.freeze_only(Owner::kEncoder);
  CHECK_THROWS_AS(estimator_phase_loss(model, p, batch, noise), TrainingContractError);

  p.freeze_only(Owner::kEstimator);
  Gradients g(p);
  for (ParamId id = 0; id < p.size(); ++id) {
    CHECK(g.tracks(id) == (p.owner(id) != Owner::kEstimator));
  }
  const LossBreakdown base = graphtune_phase_loss(model, p, batch, {0.5, 0.0}, noise, &g);
  CHECK_FALSE(base.feature.has_value());
  CHECK(base.total == doctest::Approx(base.reconstruction + 0.5 * base.kl).epsilon(1e-15));
  const LossBreakdown fed = graphtune_phase_loss(model, p, batch, {0.5, 2.0}, noise);
  REQUIRE(fed.feature.has_value());
  CHECK(fed.reconstruction == base.reconstruction);
  CHECK(fed.total == doctest::Approx(base.total + 2.0 * *fed.feature).epsilon(1e-14));

  p.freeze_all_except(Owner::kEstimator);
  Gradients ge(p);
  CHECK(estimator_phase_loss(model, p, batch, noise, &ge) >= 0.0);
  for (ParamId id = 0; id < p.size(); ++id) {
    if (p.owner(id) != Owner::kEstimator) CHECK(ge[id].size() == 0);
  }
}

TEST_CASE("zero-parameter estimator scores its bias") {
  const ModelConfig c = tiny_config();
  const GraphTuneModel model(c);
  ModelParams p = model.init_params(2);
  const ParamId bias = model.estimator_layout().head.bias;
  for (ParamId id = 0; id < p.size(); ++id) {
    if (p.owner(id) == Owner::kEstimator) p.value(id).setZero();
  }
  p.value(bias)(0, 0) = 0.25;
  p.freeze_all_except(Owner::kEstimator);
  const TrainingBatch batch = tiny_batch(c.max_nodes);
  const double expected = ((batch.condition.array() - 0.25).square()).mean();
  CHECK(estimator_phase_loss(model, p, batch, fixed_noise(c.latent_dim, 3, 3)) ==
        doctest::Approx(expected).epsilon(1e-15));
}

TEST_CASE("adam only moves unfrozen partitions") {
  const ModelConfig c = tiny_config();
  const GraphTuneModel model(c);
  ModelParams p = model.init_params(4);
  AdamState adam = AdamState::zeros_like(p);
  p.freeze_only(Owner::kEstimator);
  const ModelParams before = p;
  Gradients g(p);
  for (ParamId id = 0; id < p.size(); ++id) {
    if (g.tracks(id)) g[id].setConstant(0.3);
  }
  adam.apply(p, g, 0.01);
  CHECK(p.hash(Owner::kEstimator) == before.hash(Owner::kEstimator));
  // First bias-corrected step moves each coordinate by lr * g / (|g| + eps).
  const ParamId w = model.decoder_layout().lstm.weight;
  CHECK(((before.value(w) - p.value(w)).array() - 0.01).abs().maxCoeff() < 1e-9);
  CHECK(adam.steps[static_cast<int>(Owner::kDecoder)] == 1);
  CHECK(adam.steps[static_cast<int>(Owner::kEstimator)] == 0);
}

TEST_CASE("alternate training") {
  const DatasetManifest m = toy_manifest(24, 1);
  const ModelConfig mc = toy_model(m);
  const TrainConfig tc = toy_train();

  std::vector<TrainCheckpoint> phase_ends;
  TrainHooks hooks;
  hooks.on_phase_end = [&](const TrainCheckpoint& ck) { phase_ends.push_back(ck); };
  const TrainResult r = train_alternate(m, mc, tc, hooks);

  SUBCASE("phase order and freezing") {
    REQUIRE(r.trace.boundaries.size() == 4);
    const std::string order{phase_letter(r.trace.boundaries[0].phase),
                            phase_letter(r.trace.boundaries[1].phase),
                            phase_letter(r.trace.boundaries[2].phase),
                            phase_letter(r.trace.boundaries[3].phase)};
    CHECK(order == "ABAB");
    for (const auto& b : r.trace.boundaries) {
      const int est = static_cast<int>(Owner::kEstimator);
      if (b.phase == Phase::kGraphTune) {
        CHECK(b.hash_before[est] == b.hash_after[est]);
        CHECK(b.hash_before[0] != b.hash_after[0]);
      } else {
        CHECK(b.hash_before[0] == b.hash_after[0]);
        CHECK(b.hash_before[1] == b.hash_after[1]);
        CHECK(b.hash_before[est] != b.hash_after[est]);
      }
    }
  }
  SUBCASE("trace rows and csv") {
    CHECK(r.trace.epochs.size() == 2u * (3 + 4));
    CHECK_FALSE(r.trace.epochs[0].feature.has_value());  // first A phase
    CHECK(r.trace.epochs[7].feature.has_value());        // second A phase
    const std::string csv = r.trace.csv();
    CHECK(csv.rfind("iteration,phase,epoch,reconstruction,kl,feature,estimator\n", 0) == 0);
    CHECK(csv.find("\n1,A,1,") != std::string::npos);
    CHECK(csv.find("\n2,B,4,,,,") != std::string::npos);
  }
  SUBCASE("determinism") {
    CHECK(train_alternate(m, mc, tc).trace.csv() == r.trace.csv());
  }
  SUBCASE("resume from every phase boundary") {
    REQUIRE(phase_ends.size() == 4);
    for (std::size_t k = 0; k + 1 < phase_ends.size(); ++k) {
      const TrainCheckpoint ck = parse_checkpoint(checkpoint_bytes(phase_ends[k]));
      TrainHooks resume;
      resume.resume = &ck;
      const TrainResult rest = train_alternate(m, mc, tc, resume);
      CAPTURE(k);
      CHECK(rest.checkpoint.params.hash(Owner::kEncoder) ==
            r.checkpoint.params.hash(Owner::kEncoder));
      CHECK(rest.checkpoint.params.hash(Owner::kEstimator) ==
            r.checkpoint.params.hash(Owner::kEstimator));
      TrainTrace tail;
      const std::size_t skip = r.trace.epochs.size() - rest.trace.epochs.size();
      tail.epochs.assign(r.trace.epochs.begin() + static_cast<std::ptrdiff_t>(skip),
                         r.trace.epochs.end());
      CHECK(rest.trace.csv() == tail.csv());
    }
  }
  SUBCASE("resume rejects a different configuration") {
    TrainConfig other = tc;
    other.learning_rate = 0.5;
    TrainHooks resume;
    resume.resume = &phase_ends[0];
    CHECK_THROWS_AS(train_alternate(m, mc, other, resume), ConfigError);
  }
}

TEST_CASE("estimator loss decreases on a toy set") {
  const DatasetManifest m = toy_manifest(20, 2);
  const ModelConfig mc = toy_model(m);
  TrainConfig tc = toy_train();
  tc.batch_size = 37;  // one step per epoch
  tc.alternate_iterations = 1;
  tc.graphtune_epochs_per_phase = 5;
  tc.estimator_epochs_per_phase = 200;
  const TrainResult r = train_alternate(m, mc, tc);
  std::vector<double> est;
  for (const auto& e : r.trace.epochs) {
    if (e.estimator) est.push_back(*e.estimator);
  }
  REQUIRE(est.size() == 200);
  double head = 0.0, tail = 0.0;
  for (int i = 0; i < 20; ++i) {
    head += est[static_cast<std::size_t>(i)];
    tail += est[est.size() - 1 - static_cast<std::size_t>(i)];
  }
  CHECK(tail < 0.5 * head);
}

TEST_CASE("training errors") {
  const DatasetManifest m = toy_manifest(10, 3);
  const ModelConfig mc = toy_model(m);
  TrainConfig tc = toy_train();

  CHECK_THROWS_AS(train_alternate(DatasetManifest{}, mc, tc), EmptyDatasetError);
  CHECK_THROWS_AS(train_alternate(m, tiny_config(), tc), ConfigError);
  TrainConfig bad = tc;
  bad.batch_size = 0;
  CHECK_THROWS_AS(train_alternate(m, mc, bad), ConfigError);
  bad = tc;
  bad.feature_loss_weight = -1.0;
  CHECK_THROWS_AS(bad.validate(), ConfigError);

  SUBCASE("non-finite parameters diverge with the trace attached") {
    TrainCheckpoint poisoned;
    TrainHooks first;
    first.on_phase_end = [&](const TrainCheckpoint& ck) {
      if (ck.state.phases_completed == 1) poisoned = ck;
    };
    train_alternate(m, mc, tc, first);
    poisoned.params.value(GraphTuneModel(mc).decoder_layout().init.bias)(0, 0) = NAN;
    TrainHooks resume;
    resume.resume = &poisoned;
    try {
      train_alternate(m, mc, tc, resume);
      FAIL("expected divergence");
    } catch (const DivergenceError& e) {
      CHECK(std::string(e.what()).find("non-finite") != std::string::npos);
      CHECK(e.trace().epochs.empty());
    }
  }
}

TEST_CASE("checkpoint format") {
  const DatasetManifest m = toy_manifest(10, 4);
  const ModelConfig mc = toy_model(m);
  const TrainResult r = train_alternate(m, mc, toy_train());
  const std::string bytes = checkpoint_bytes(r.checkpoint);
  const TrainCheckpoint back = parse_checkpoint(bytes);
  CHECK(back.model == r.checkpoint.model);
  CHECK(back.train == r.checkpoint.train);
  CHECK(back.feature_order == r.checkpoint.feature_order);
  CHECK(back.standardizer == r.checkpoint.standardizer);
  CHECK(back.state.phases_completed == 4);
  CHECK(back.state.adam.steps == r.checkpoint.state.adam.steps);
  for (Owner o : kAllOwners) CHECK(back.params.hash(o) == r.checkpoint.params.hash(o));
  CHECK(checkpoint_bytes(back) == bytes);
  CHECK(bytes.substr(0, 4) == "GTCK");

  const auto path = std::filesystem::temp_directory_path() / "graphtune_test.ckpt";
  save_checkpoint(r.checkpoint, path);
  CHECK(checkpoint_bytes(load_checkpoint(path)) == bytes);

  std::string bad_magic = bytes;
  bad_magic[0] = 'X';
  CHECK_THROWS_AS(parse_checkpoint(bad_magic), FormatError);
  std::string bad_version = bytes;
  bad_version[4] = 9;
  CHECK_THROWS_AS(parse_checkpoint(bad_version), FormatError);
  CHECK_THROWS_AS(parse_checkpoint(bytes.substr(0, bytes.size() - 3)), FormatError);
  CHECK_THROWS_AS(parse_checkpoint(bytes + "x"), FormatError);
  CHECK_THROWS_AS(parse_checkpoint(""), FormatError);
  CHECK_THROWS_AS(load_checkpoint(path.string() + ".missing"), FormatError);
}
