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
#include <optional>
#include <string>
#include <vector>

#include "graphtune/dataset.hpp"
#include "graphtune/error.hpp"
#include "graphtune/model.hpp"

namespace graphtune {

struct TrainConfig {
  int batch_size = 37;
  int graphtune_epochs_per_phase = 500;
  int estimator_epochs_per_phase = 10000;
  int alternate_iterations = 2;
  double learning_rate = 1e-3;
  std::uint64_t seed = 0;
  /// Weight of the estimator feedback term; 0 gives the plain CVAE baseline.
  double feature_loss_weight = 1.0;
  double grad_clip_norm = 5.0;

  void validate() const;
  friend bool operator==(const TrainConfig&, const TrainConfig&) = default;
};

enum class Phase : std::uint8_t { kGraphTune = 0, kEstimator = 1 };
char phase_letter(Phase phase);

struct EpochRecord {
  int iteration = 0;
  Phase phase = Phase::kGraphTune;
  int epoch = 0;
  std::optional<double> reconstruction;
  std::optional<double> kl;
  std::optional<double> feature;
  std::optional<double> estimator;
};

struct PhaseBoundary {
  int iteration = 0;
  Phase phase = Phase::kGraphTune;
  std::array<std::uint64_t, 3> hash_before{};  // indexed by Owner
  std::array<std::uint64_t, 3> hash_after{};
};

struct TrainTrace {
  std::vector<EpochRecord> epochs;
  std::vector<PhaseBoundary> boundaries;

  /// iteration,phase,epoch,reconstruction,kl,feature,estimator; components a
  /// phase does not compute are left empty.
  std::string csv() const;
};

class DivergenceError : public Error {
 public:
  DivergenceError(const std::string& what, TrainTrace trace)
      : Error(what), trace_(std::move(trace)) {}
  const TrainTrace& trace() const { return trace_; }

 private:
  TrainTrace trace_;
};

/// Mini-batch of token sequences with their standardized feature vectors.
/// The same matrix is the encoder/decoder condition and the estimator target.
struct TrainingBatch {
  SequenceBatch sequences;
  Matrix condition;  // C x B
};

TrainingBatch make_batch(std::span<const TokenSequence> tokens,
                         std::span<const Vector> conditions,
                         std::span<const std::size_t> indices);

// ---------------------------------------------------------------------------
// Losses. Batched forms average over the batch and optionally write the
// gradient of the returned value.

using SlotMatrices = std::vector<std::array<Matrix, kTokenSlots>>;

double reconstruction_loss(const SoftBatch& soft, const SequenceBatch& target,
                           SlotMatrices* grad_logits = nullptr);
double kl_loss(const Matrix& mu, const Matrix& logvar, Matrix* grad_mu = nullptr,
               Matrix* grad_logvar = nullptr);
double feature_loss(const Matrix& estimate, const Matrix& truth,
                    Matrix* grad = nullptr);

double reconstruction_loss(const SoftSequence& soft, const TokenSequence& target);
double kl_loss(const Vector& mu, const Vector& logvar);
/// Mean squared error; throws ContractError unless both share one order.
double feature_loss(const FeatureVector& estimate, const FeatureVector& truth);

struct LossWeights {
  double kl = 1.0;
  double feature = 1.0;
};

struct LossBreakdown {
  double reconstruction = 0.0;
  double kl = 0.0;
  /// Empty when the feature weight is 0 (the estimator is not evaluated).
  std::optional<double> feature;
  double total = 0.0;
};

/// Reconstruction + kl_weight * KL + feature_weight * estimator MSE on the
/// soft reconstruction. Requires the estimator partition to be frozen; the
/// feedback gradient flows through the estimator into encoder and decoder.
/// `noise` is the standard-normal draw for the reparameterization (L x B).
LossBreakdown graphtune_phase_loss(const GraphTuneModel& model,
                                   const ModelParams& params,
                                   const TrainingBatch& batch,
                                   const LossWeights& weights, const Matrix& noise,
                                   Gradients* grads = nullptr);

/// Teacher-forced soft reconstructions from the GraphTune part.
SoftBatch reconstruct(const GraphTuneModel& model, const ModelParams& params,
                      const TrainingBatch& batch, const Matrix& noise);

/// Estimator MSE against the batch's true features on given reconstructions.
double estimator_loss(const GraphTuneModel& model, const ModelParams& params,
                      const SoftBatch& soft, const Matrix& truth,
                      Gradients* grads = nullptr);

/// Requires encoder and decoder frozen; reconstructs then scores the
/// estimator.
double estimator_phase_loss(const GraphTuneModel& model,
                            const ModelParams& params,
                            const TrainingBatch& batch, const Matrix& noise,
                            Gradients* grads = nullptr);

// ---------------------------------------------------------------------------

/// Adam moments and per-partition step counts.
struct AdamState {
  std::vector<Matrix> first;
  std::vector<Matrix> second;
  std::array<long long, 3> steps{};

  static AdamState zeros_like(const ModelParams& params);
  /// Updates every parameter whose partition is not frozen.
  void apply(ModelParams& params, const Gradients& grads, double learning_rate);
};

struct TrainState {
  int phases_completed = 0;
  long long graphtune_steps = 0;
  AdamState adam;
};

/// Everything needed to resume training or to generate.
struct TrainCheckpoint {
  ModelConfig model;
  TrainConfig train;
  std::vector<Feature> feature_order;
  Standardizer standardizer;
  ModelParams params;
  TrainState state;
};

struct TrainHooks {
  /// Called after every phase with the state at that boundary.
  std::function<void(const TrainCheckpoint&)> on_phase_end;
  std::function<void(const EpochRecord&)> on_epoch;
  /// Continue from a phase-boundary checkpoint instead of initializing.
  const TrainCheckpoint* resume = nullptr;
};

struct TrainResult {
  TrainCheckpoint checkpoint;
  TrainTrace trace;
};

/// Fills the dataset-derived fields (max_nodes, max_sequence_length,
/// condition_dim, estimator_out) of a model configuration.
ModelConfig configure_for(ModelConfig base, const DatasetManifest& manifest);

/// Alternate training: for each iteration, phase A trains encoder + decoder
/// with the estimator frozen (feedback weight forced to 0 on the first
/// iteration), then phase B trains the estimator with encoder + decoder
/// frozen. Each epoch draws a fresh seeded shuffle; batches group records of
/// similar code length to limit padding. Throws DivergenceError on a
/// non-finite loss.
TrainResult train_alternate(const DatasetManifest& manifest,
                            const ModelConfig& model_config,
                            const TrainConfig& train_config,
                            const TrainHooks& hooks = {});

}  // namespace graphtune
