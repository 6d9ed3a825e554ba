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
#include <string>
#include <vector>

#include "../gradcheck.hpp"
#include "graphtune/dataset.hpp"
#include "graphtune/model.hpp"

using namespace graphtune;
using namespace graphtune::testing;

namespace {

// Scalar reference implementation. Parameters are looked up by name and read
// element by element; no code from nn.cpp or model.cpp runs here.
class Oracle {
 public:
  using Vec = std::vector<double>;

  Oracle(const ModelParams& p, const ModelConfig& c) : p_(p), c_(c) {}

  double at(const std::string& name, int r, int col = 0) const {
    return p_.value(*p_.find(name))(r, col);
  }
  int rows(const std::string& name) const {
    return static_cast<int>(p_.value(*p_.find(name)).rows());
  }

  Vec affine(const std::string& layer, const Vec& x) const {
    const int out = rows(layer + ".weight");
    Vec y(out);
    for (int i = 0; i < out; ++i) {
      double s = at(layer + ".bias", i);
      for (std::size_t j = 0; j < x.size(); ++j) s += at(layer + ".weight", i, static_cast<int>(j)) * x[j];
      y[i] = s;
    }
    return y;
  }

  static double sigmoid(double v) { return 1.0 / (1.0 + std::exp(-v)); }

  void lstm_cell(const std::string& layer, const Vec& x, Vec& h, Vec& c) const {
    Vec xh = x;
    xh.insert(xh.end(), h.begin(), h.end());
    const Vec a = affine(layer, xh);
    const std::size_t H = h.size();
    for (std::size_t k = 0; k < H; ++k) {
      const double i = sigmoid(a[k]);
      const double f = sigmoid(a[H + k]);
      const double g = std::tanh(a[2 * H + k]);
      const double o = sigmoid(a[3 * H + k]);
      c[k] = f * c[k] + i * g;
      h[k] = o * std::tanh(c[k]);
    }
  }

  Vec embed(const std::string& net, const TokenStep& step) const {
    Vec out;
    for (int s = 0; s < kTokenSlots; ++s) {
      const std::string table = net + ".embedding." + std::to_string(s);
      for (int e = 0; e < c_.embedding_dim; ++e) out.push_back(at(table, e, step[s]));
    }
    return out;
  }

  std::pair<Vec, Vec> encode(const TokenSequence& seq, const Vec& cond) const {
    Vec h(c_.encoder_hidden, 0.0), c(c_.encoder_hidden, 0.0);
    for (const auto& step : seq.steps) {
      Vec x = embed("encoder", step);
      x.insert(x.end(), cond.begin(), cond.end());
      lstm_cell("encoder.lstm", x, h, c);
    }
    return {affine("encoder.mu", h), affine("encoder.logvar", h)};
  }

  // probs[t][s][v]
  std::vector<std::vector<Vec>> decode(const Vec& z, const Vec& cond,
                                       const TokenSequence& teacher) const {
    Vec zc = z;
    zc.insert(zc.end(), cond.begin(), cond.end());
    Vec h(c_.decoder_hidden, 0.0), c(c_.decoder_hidden, 0.0);
    std::vector<std::vector<Vec>> out;
    for (std::size_t t = 0; t < teacher.size(); ++t) {
      Vec x = t == 0 ? affine("decoder.init", zc) : embed("decoder", teacher.steps[t - 1]);
      x.insert(x.end(), zc.begin(), zc.end());
      lstm_cell("decoder.lstm", x, h, c);
      std::vector<Vec> slots;
      for (int s = 0; s < kTokenSlots; ++s) {
        Vec logits = affine("decoder.head." + std::to_string(s), h);
        double mx = logits[0];
        for (double v : logits) mx = std::max(mx, v);
        double z_sum = 0.0;
        for (double& v : logits) z_sum += (v = std::exp(v - mx));
        for (double& v : logits) v /= z_sum;
        slots.push_back(logits);
      }
      out.push_back(slots);
    }
    return out;
  }

  // Hard-input estimator: table lookup instead of expected embedding.
  Vec estimate(const TokenSequence& seq) const {
    Vec h(c_.estimator_hidden, 0.0), c(c_.estimator_hidden, 0.0);
    for (const auto& step : seq.steps) {
      lstm_cell("estimator.lstm", affine("estimator.pre", embed("estimator", step)), h, c);
    }
    return affine("estimator.head", h);
  }

 private:
  const ModelParams& p_;
  const ModelConfig& c_;
};

ModelConfig two_feature_config() {
  ModelConfig c = tiny_config();
  c.condition_dim = 2;
  c.estimator_out = 2;
  return c;
}

TokenSequence seq_of(const Graph& g, int max_nodes) { return to_tokens(encode(g), max_nodes); }

Vector vec(std::initializer_list<double> v) {
  Vector out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out(i++) = x;
  return out;
}

}  // namespace

TEST_CASE("layout and initialization") {
  const ModelConfig c = tiny_config();
  const GraphTuneModel model(c);
  const ModelParams p = model.init_params(3);
  CHECK_NOTHROW(model.check_layout(p));
  CHECK(p.scalar_count(Owner::kEncoder) > 0);
  CHECK(p.scalar_count(Owner::kEstimator) > 0);

  const nn::Lstm& lstm = model.decoder_layout().lstm;
  const Matrix& bias = p.value(lstm.bias);
  const double bound = 1.0 / std::sqrt(lstm.input + lstm.hidden);
  for (int k = 0; k < lstm.hidden; ++k) CHECK(bias(lstm.hidden + k, 0) == 1.0);
  CHECK(p.value(lstm.weight).cwiseAbs().maxCoeff() <= bound);
  CHECK(model.init_params(3).hash(Owner::kDecoder) == p.hash(Owner::kDecoder));
  CHECK(model.init_params(4).hash(Owner::kDecoder) != p.hash(Owner::kDecoder));

  ModelConfig other = c;
  other.decoder_hidden += 1;
  CHECK_THROWS_AS(GraphTuneModel(other).check_layout(p), ConfigError);

  ModelConfig bad = c;
  bad.estimator_out = 2;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = c;
  bad.latent_dim = 0;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
}

TEST_CASE("zero parameters") {
  const ModelConfig c = tiny_config();
  const GraphTuneModel model(c);
  ModelParams p = model.zero_params();
  const TokenSequence seq = seq_of(complete_graph(3), c.max_nodes);
  const Vector cond = vec({0.4});

  const auto post = model.encode(p, seq, cond);
  CHECK(post.mu.isZero(0.0));
  CHECK(post.logvar.isZero(0.0));

  const SoftSequence soft = model.decode_teacher_forced(p, Vector::Zero(c.latent_dim), cond, seq);
  const VocabSizes v = c.vocab();
  for (const auto& step : soft.steps) {
    for (int s = 0; s < kTokenSlots; ++s) {
      CHECK((step[s].array() - 1.0 / v[s]).abs().maxCoeff() < 1e-15);
    }
  }

  p.value(model.estimator_layout().head.bias)(0, 0) = 0.7;
  CHECK(model.estimate(p, SoftSequence::one_hot(seq))(0) == 0.7);
}

TEST_CASE("reparameterize") {
  const Vector mu = vec({0.5, -1.0});
  CHECK(reparameterize(mu, Vector::Zero(2), Vector::Zero(2)) == mu);
  const Vector e = vec({0.3, 0.2});
  CHECK(reparameterize(mu, Vector::Zero(2), e).isApprox(mu + e, 1e-15));
  const Vector lv = Vector::Constant(2, 2.0 * std::log(2.0));
  CHECK(reparameterize(Vector::Zero(2), lv, Vector::Ones(2)).isApprox(Vector::Constant(2, 2.0), 1e-14));
}

TEST_CASE("forward passes match the scalar oracle") {
  const ModelConfig c = two_feature_config();
  const GraphTuneModel model(c);
  const ModelParams p = model.init_params(21);
  const Oracle oracle(p, c);
  const Vector cond = vec({0.3, -1.2});
  const std::vector<double> cond_v{0.3, -1.2};

  for (const Graph& g : {complete_graph(3), path_graph(4), star_graph(3), cycle_graph(4)}) {
    const TokenSequence seq = seq_of(g, c.max_nodes);

    const auto post = model.encode(p, seq, cond);
    const auto [mu, lv] = oracle.encode(seq, cond_v);
    for (int i = 0; i < c.latent_dim; ++i) {
      CHECK(std::abs(post.mu(i) - mu[i]) < 1e-10);
      CHECK(std::abs(post.logvar(i) - lv[i]) < 1e-10);
    }

    const Vector z = fixed_noise(c.latent_dim, 1, 9).col(0);
    const SoftSequence soft = model.decode_teacher_forced(p, z, cond, seq);
    const auto ref = oracle.decode({z.data(), z.data() + z.size()}, cond_v, seq);
    REQUIRE(soft.size() == seq.size());
    double worst = 0.0;
    for (std::size_t t = 0; t < seq.size(); ++t) {
      for (int s = 0; s < kTokenSlots; ++s) {
        for (std::size_t k = 0; k < ref[t][s].size(); ++k) {
          worst = std::max(worst, std::abs(soft.steps[t][s](static_cast<Eigen::Index>(k)) - ref[t][s][k]));
        }
      }
    }
    CHECK(worst < 1e-10);
    CHECK_NOTHROW(soft.check());

    const Vector est = model.estimate(p, SoftSequence::one_hot(seq));
    const auto hard = oracle.estimate(seq);
    REQUIRE(est.size() == 2);
    CHECK(std::abs(est(0) - hard[0]) < 1e-10);
    CHECK(std::abs(est(1) - hard[1]) < 1e-10);
  }
}

TEST_CASE("batched encoder is padding invariant") {
  const ModelConfig c = tiny_config();
  const GraphTuneModel model(c);
  const ModelParams p = model.init_params(5);
  const TokenSequence a = seq_of(path_graph(3), c.max_nodes);
  const TokenSequence b = seq_of(complete_graph(3), c.max_nodes);
  REQUIRE(a.size() < b.size());
  const std::vector<const TokenSequence*> both{&a, &b};
  const SequenceBatch batch = SequenceBatch::from(both);
  Matrix cond(1, 2);
  cond << 0.2, -0.5;
  EncoderTrace trace;
  model.encoder_forward(p, batch, cond, trace);
  CHECK((trace.mu.col(0) - model.encode(p, a, vec({0.2})).mu).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((trace.mu.col(1) - model.encode(p, b, vec({-0.5})).mu).cwiseAbs().maxCoeff() < 1e-12);

  // Estimator: padded one-hot batch equals per-sequence estimates.
  const SoftSequence sa = SoftSequence::one_hot(a);
  const SoftSequence sb = SoftSequence::one_hot(b);
  const std::vector<const SoftSequence*> soft_in{&sa, &sb};
  EstimatorTrace et;
  model.estimator_forward(p, to_soft_batch(soft_in), et);
  CHECK(std::abs(et.estimate(0, 0) - model.estimate(p, sa)(0)) < 1e-12);
  CHECK(std::abs(et.estimate(0, 1) - model.estimate(p, sb)(0)) < 1e-12);
}

TEST_CASE("forward passes are pure and distinguish inputs") {
  const ModelConfig c = tiny_config();
  const GraphTuneModel model(c);
  const ModelParams p = model.init_params(8);
  const TokenSequence a = seq_of(path_graph(4), c.max_nodes);
  const TokenSequence b = seq_of(star_graph(3), c.max_nodes);
  const Vector cond = vec({1.0});
  const auto first = model.encode(p, a, cond);
  const auto again = model.encode(p, a, cond);
  CHECK(first.mu == again.mu);
  CHECK(first.logvar == again.logvar);
  CHECK(model.encode(p, b, cond).mu != first.mu);
  CHECK_THROWS_AS(model.encode(p, a, vec({1.0, 2.0})), ConfigError);
}

TEST_CASE("autoregressive generation") {
  const ModelConfig c = tiny_config();
  const GraphTuneModel model(c);
  const ModelParams p = model.init_params(13);
  const Vector z = fixed_noise(c.latent_dim, 1, 2).col(0);
  const Vector cond = vec({0.1});

  const TokenSequence x = model.generate(p, z, cond, argmax_sampler(), c.max_sequence_length - 1);
  const TokenSequence y = model.generate(p, z, cond, argmax_sampler(), c.max_sequence_length - 1);
  CHECK(x == y);
  CHECK(is_end_step(x.steps.back(), c.max_nodes));
  CHECK(static_cast<int>(x.size()) <= c.max_sequence_length);

  const TokenSequence one = model.generate(p, z, cond, argmax_sampler(), 1);
  CHECK(one.size() <= 2);
  CHECK(is_end_step(one.steps.back(), c.max_nodes));

  std::mt19937_64 r1(4), r2(4);
  CHECK(model.generate(p, z, cond, categorical_sampler(r1), 4) ==
        model.generate(p, z, cond, categorical_sampler(r2), 4));
  CHECK_THROWS_AS(model.generate(p, z, cond, argmax_sampler(), c.max_sequence_length + 1),
                  ConfigError);

  SUBCASE("decoder probabilities are distributions") {
    const SoftSequence s = model.decode_teacher_forced(p, z, cond, x);
    CHECK_NOTHROW(s.check());
  }
}

TEST_CASE("soft sequences") {
  const TokenSequence t = to_tokens(encode(path_graph(3)), 4);
  SoftSequence s = SoftSequence::one_hot(t);
  CHECK_NOTHROW(s.check());
  s.steps[0][0](0) = 0.5;
  CHECK_THROWS_AS(s.check(), ContractError);
  s = SoftSequence::one_hot(t);
  s.steps[1][2] = Vector::Constant(2, 0.5 + 1e-5);
  CHECK_THROWS_AS(s.check(), ContractError);
}

TEST_CASE("standardizer") {
  const std::vector<Feature> order{Feature::kAspl};
  const std::vector<FeatureVector> rows{FeatureVector(order, {1.0}),
                                        FeatureVector(order, {2.0}),
                                        FeatureVector(order, {3.0})};
  const Standardizer st = Standardizer::fit(rows);
  CHECK(st.mean[0] == 2.0);
  CHECK(st.scale[0] == 1.0);  // sample std of {1,2,3}
  const std::vector<double> raw{3.0};
  CHECK(st.apply(raw)(0) == 1.0);
  CHECK(st.invert(vec({-1.0}))[0] == 1.0);

  const std::vector<FeatureVector> flat{FeatureVector(order, {4.0}), FeatureVector(order, {4.0})};
  CHECK(Standardizer::fit(flat).scale[0] == 1.0);
}
