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

// Finite-difference harness for the phase losses on a tiny configuration.
// Shared by the unit tests and the acceptance suite.

#include <cstdio>
#include <random>
#include <string>
#include <vector>

#include "graphtune/dataset.hpp"
#include "graphtune/training.hpp"
#include "support.hpp"

namespace graphtune::testing {

inline ModelConfig tiny_config() {
  ModelConfig c;
  c.latent_dim = 4;
  c.encoder_hidden = 6;
  c.decoder_hidden = 8;
  c.embedding_dim = 3;
  c.estimator_pre_fc = 5;
  c.estimator_hidden = 7;
  c.estimator_out = 1;
  c.condition_dim = 1;
  c.max_nodes = 4;
  c.max_sequence_length = 5;
  return c;
}

/// Three sequences of 3-4 steps: triangle, path, star.
inline TrainingBatch tiny_batch(int max_nodes) {
  std::vector<TokenSequence> tokens{to_tokens(encode(complete_graph(3)), max_nodes),
                                    to_tokens(encode(path_graph(3)), max_nodes),
                                    to_tokens(encode(star_graph(3)), max_nodes)};
  std::vector<Vector> conds{Vector::Constant(1, -0.7), Vector::Constant(1, 0.4),
                            Vector::Constant(1, 1.3)};
  std::vector<std::size_t> idx{0, 1, 2};
  return make_batch(tokens, conds, idx);
}

inline std::string fmt_g(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

struct GradCheckResult {
  double max_relative_error = 0.0;
  std::string worst;
  std::size_t checked = 0;
};

/// Compares the analytic gradient written by `loss(grads)` against central
/// differences of `loss(nullptr)` for every scalar of every tracked
/// parameter.
inline GradCheckResult gradient_check(
    ModelParams& params, const std::function<double(Gradients*)>& loss,
    double step = 1e-4) {
  Gradients grads(params);
  loss(&grads);
  GradCheckResult result;
  for (ParamId id = 0; id < params.size(); ++id) {
    if (!grads.tracks(id)) continue;
    Matrix& value = params.value(id);
    for (Eigen::Index k = 0; k < value.size(); ++k) {
      const double numeric = central_difference(
          [&] { return loss(nullptr); }, value.data()[k], step);
      const double analytic = grads[id].data()[k];
      const double err = relative_error(analytic, numeric);
      ++result.checked;
      if (err > result.max_relative_error) {
        result.max_relative_error = err;
        result.worst = params.name(id) + "[" + std::to_string(k) +
                       "] analytic=" + fmt_g(analytic) +
                       " numeric=" + fmt_g(numeric);
      }
    }
  }
  return result;
}

inline Matrix fixed_noise(int rows, int cols, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = normal(rng);
  return m;
}

}  // namespace graphtune::testing
