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

#include <array>
#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <vector>

#include "graphtune/dfs_code.hpp"
#include "graphtune/features.hpp"
#include "graphtune/nn.hpp"
#include "graphtune/params.hpp"

namespace graphtune {

struct ModelConfig {
  int latent_dim = 10;
  int encoder_hidden = 256;
  int decoder_hidden = 256;
  int embedding_dim = 64;
  int estimator_pre_fc = 256;
  int estimator_hidden = 512;
  int estimator_out = 1;
  int condition_dim = 1;
  int max_nodes = 0;
  int max_sequence_length = 0;
  double kl_weight = 1.0;
  /// Fraction of GraphTune-phase optimizer steps over which the KL weight
  /// ramps linearly from 0 to kl_weight.
  double kl_anneal_fraction = 0.1;

  VocabSizes vocab() const { return token_vocab_sizes(max_nodes); }
  /// Throws ConfigError on any violated invariant.
  void validate() const;
  friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

/// Per-feature z-scoring applied to condition values and estimator targets.
struct Standardizer {
  std::vector<double> mean;
  std::vector<double> scale;

  /// Mean and sample standard deviation of each column; a zero spread maps
  /// to scale 1.
  static Standardizer fit(std::span<const FeatureVector> rows);
  static Standardizer identity(std::size_t dims);
  Vector apply(std::span<const double> raw) const;
  Vector apply(const FeatureVector& raw) const { return apply(raw.values()); }
  std::vector<double> invert(const Vector& standardized) const;
  friend bool operator==(const Standardizer&, const Standardizer&) = default;
};

/// Token sequences padded to a common length, one column per sequence.
/// Padding positions hold the end step and carry mask 0.
struct SequenceBatch {
  int max_nodes = 0;
  std::vector<std::vector<TokenStep>> tokens;  // [t][b]
  std::vector<RowVector> mask;                 // [t], 1 x B
  std::vector<int> lengths;

  static SequenceBatch from(std::span<const TokenSequence* const> seqs);
  static SequenceBatch from(const TokenSequence& seq);
  std::size_t steps() const { return tokens.size(); }
  int batch() const { return static_cast<int>(lengths.size()); }
};

/// Per-step, per-slot probability vectors (one column per batch item).
struct SoftBatch {
  std::vector<std::array<Matrix, kTokenSlots>> probs;      // [t][s]: V_s x B
  std::vector<std::array<Matrix, kTokenSlots>> log_probs;  // [t][s]
  std::vector<RowVector> mask;
};

/// Single-sequence soft reconstruction.
struct SoftSequence {
  int max_nodes = 0;
  std::vector<std::array<Vector, kTokenSlots>> steps;

  std::size_t size() const { return steps.size(); }
  /// One-hot form of a token sequence.
  static SoftSequence one_hot(const TokenSequence& seq);
  /// Throws ContractError unless every vector is a probability distribution
  /// (non-negative, sums to 1 within 1e-6) of the right length.
  void check() const;
};

SoftBatch to_soft_batch(std::span<const SoftSequence* const> seqs);
SoftSequence soft_sequence_at(const SoftBatch& batch, int column, int length,
                              int max_nodes);

struct EncoderTrace {
  std::vector<Matrix> inputs;
  nn::LstmTrace lstm;
  Matrix final_hidden;
  Matrix mu;
  Matrix logvar;
};

struct DecoderTrace {
  Matrix zc;
  Matrix init_input;
  std::vector<Matrix> inputs;
  nn::LstmTrace lstm;
  SoftBatch soft;
};

struct EstimatorTrace {
  std::vector<Matrix> embedded;
  std::vector<Matrix> pre;
  nn::LstmTrace lstm;
  Matrix final_hidden;
  Matrix estimate;
};

/// Draws one token index from a slot's logits.
using SlotSampler = std::function<int(const Vector& logits)>;
SlotSampler argmax_sampler();
/// Categorical draw from softmax(logits / temperature).
SlotSampler categorical_sampler(std::mt19937_64& rng, double temperature = 1.0);

/// CVAE encoder, autoregressive decoder and feature estimator over a shared
/// ModelParams. All forward passes are pure functions of (params, inputs).
class GraphTuneModel {
 public:
  explicit GraphTuneModel(ModelConfig config);

  const ModelConfig& config() const { return config_; }

  /// Registers every parameter in a fixed order. Weights are uniform in
  /// +-1/sqrt(fan_in); LSTM forget-gate biases start at +1.
  ModelParams init_params(std::uint64_t seed) const;
  /// Zero-valued parameters with the model's layout.
  ModelParams zero_params() const;
  /// Throws ConfigError when names, owners or shapes differ from the layout.
  void check_layout(const ModelParams& params) const;

  // Batched passes (used by training).
  void encoder_forward(const ModelParams& params, const SequenceBatch& batch,
                       const Matrix& condition, EncoderTrace& trace) const;
  void encoder_backward(const ModelParams& params, const SequenceBatch& batch,
                        const EncoderTrace& trace, const Matrix& grad_mu,
                        const Matrix& grad_logvar, Gradients& grads) const;

  void decoder_forward(const ModelParams& params, const Matrix& latent,
                       const Matrix& condition, const SequenceBatch& teacher,
                       DecoderTrace& trace) const;
  /// Returns the gradient w.r.t. the latent input.
  Matrix decoder_backward(const ModelParams& params, const SequenceBatch& teacher,
                          const DecoderTrace& trace,
                          const std::vector<std::array<Matrix, kTokenSlots>>& grad_logits,
                          Gradients& grads) const;

  void estimator_forward(const ModelParams& params, const SoftBatch& soft,
                         EstimatorTrace& trace) const;
  /// Returns d loss / d probs per step and slot when `want_probs` is set.
  std::vector<std::array<Matrix, kTokenSlots>> estimator_backward(
      const ModelParams& params, const SoftBatch& soft,
      const EstimatorTrace& trace, const Matrix& grad_estimate,
      Gradients& grads, bool want_probs) const;

  // Single-sequence operations. Conditions are already standardized.
  struct Posterior {
    Vector mu;
    Vector logvar;
  };
  Posterior encode(const ModelParams& params, const TokenSequence& seq,
                   const Vector& condition) const;
  SoftSequence decode_teacher_forced(const ModelParams& params,
                                     const Vector& latent, const Vector& condition,
                                     const TokenSequence& teacher) const;
  /// Autoregressive sampling. Stops when the sampled from-time slot is the end
  /// symbol or after max_steps edge steps; the result always ends with an end
  /// step.
  TokenSequence generate(const ModelParams& params, const Vector& latent,
                         const Vector& condition, const SlotSampler& sampler,
                         int max_steps) const;
  Vector estimate(const ModelParams& params, const SoftSequence& soft) const;

  // Parameter handles, exposed for tests.
  struct EncoderLayout {
    std::array<ParamId, kTokenSlots> embedding;
    nn::Lstm lstm;
    nn::Affine mu, logvar;
  };
  struct DecoderLayout {
    std::array<ParamId, kTokenSlots> embedding;
    nn::Affine init;
    nn::Lstm lstm;
    std::array<nn::Affine, kTokenSlots> head;
  };
  struct EstimatorLayout {
    std::array<ParamId, kTokenSlots> embedding;
    nn::Affine pre;
    nn::Lstm lstm;
    nn::Affine head;
  };
  const EncoderLayout& encoder_layout() const { return encoder_; }
  const DecoderLayout& decoder_layout() const { return decoder_; }
  const EstimatorLayout& estimator_layout() const { return estimator_; }

 private:
  struct Slot {
    std::string name;
    Owner owner;
    int rows, cols;
    int fan_in;
    bool forget_bias;
  };
  void build_layout();
  ParamId declare(std::string name, Owner owner, int rows, int cols,
                  int fan_in, bool forget_bias = false);
  nn::Affine declare_affine(const std::string& name, Owner owner, int out, int in);
  nn::Lstm declare_lstm(const std::string& name, Owner owner, int in, int hidden);
  Matrix embed_tokens(const ModelParams& params,
                      const std::array<ParamId, kTokenSlots>& table,
                      const std::vector<TokenStep>& step) const;
  void scatter_embedding_grads(const std::array<ParamId, kTokenSlots>& table,
                               const std::vector<TokenStep>& step,
                               const Matrix& grad, Gradients& grads) const;

  ModelConfig config_;
  VocabSizes vocab_{};
  std::vector<Slot> layout_;
  EncoderLayout encoder_{};
  DecoderLayout decoder_{};
  EstimatorLayout estimator_{};
};

/// mu + exp(0.5 * logvar) * noise.
Vector reparameterize(const Vector& mu, const Vector& logvar, const Vector& noise);

}  // namespace graphtune
