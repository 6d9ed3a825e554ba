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

#include "graphtune/training.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <random>

namespace graphtune {

void TrainConfig::validate() const {
  if (batch_size < 1 || graphtune_epochs_per_phase < 1 ||
      estimator_epochs_per_phase < 1 || alternate_iterations < 1) {
    throw ConfigError("batch size, epoch counts and iterations must be >= 1");
  }
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) {
    throw ConfigError("learning_rate must be > 0");
  }
  if (!(feature_loss_weight >= 0.0) || !std::isfinite(feature_loss_weight)) {
    throw ConfigError("feature_loss_weight must be >= 0");
  }
  if (!(grad_clip_norm > 0.0)) throw ConfigError("grad_clip_norm must be > 0");
}

char phase_letter(Phase phase) { return phase == Phase::kGraphTune ? 'A' : 'B'; }

std::string TrainTrace::csv() const {
  std::string out = "iteration,phase,epoch,reconstruction,kl,feature,estimator\n";
  char buf[64];
  auto field = [&](const std::optional<double>& v) {
    out += ',';
    if (v) {
      std::snprintf(buf, sizeof buf, "%.17g", *v);
      out += buf;
    }
  };
  for (const auto& e : epochs) {
    out += std::to_string(e.iteration) + ',' + phase_letter(e.phase) + ',' +
           std::to_string(e.epoch);
    field(e.reconstruction);
    field(e.kl);
    field(e.feature);
    field(e.estimator);
    out += '\n';
  }
  return out;
}

TrainingBatch make_batch(std::span<const TokenSequence> tokens,
                         std::span<const Vector> conditions,
                         std::span<const std::size_t> indices) {
  std::vector<const TokenSequence*> seqs;
  seqs.reserve(indices.size());
  for (std::size_t i : indices) seqs.push_back(&tokens[i]);
  TrainingBatch batch{SequenceBatch::from(seqs), Matrix()};
  const auto C = conditions[indices[0]].size();
  batch.condition.resize(C, static_cast<Eigen::Index>(indices.size()));
  for (std::size_t b = 0; b < indices.size(); ++b) {
    batch.condition.col(static_cast<Eigen::Index>(b)) = conditions[indices[b]];
  }
  return batch;
}

// ---------------------------------------------------------------------------

double reconstruction_loss(const SoftBatch& soft, const SequenceBatch& target,
                           SlotMatrices* grad_logits) {
  const std::size_t T = target.steps();
  if (soft.log_probs.size() != T) {
    throw ContractError("reconstruction: prediction has " +
                        std::to_string(soft.log_probs.size()) +
                        " steps, target has " + std::to_string(T));
  }
  const int B = target.batch();
  const double inv_b = 1.0 / B;
  double loss = 0.0;
  if (grad_logits) grad_logits->resize(T);
  for (std::size_t t = 0; t < T; ++t) {
    const RowVector& m = target.mask[t];
    for (int s = 0; s < kTokenSlots; ++s) {
      const Matrix& logp = soft.log_probs[t][s];
      Matrix* g = nullptr;
      if (grad_logits) {
        g = &(*grad_logits)[t][s];
        *g = soft.probs[t][s] * inv_b;
      }
      for (int b = 0; b < B; ++b) {
        const int k = target.tokens[t][b][s];
        if (m[b] == 0.0) {
          if (g) g->col(b).setZero();
          continue;
        }
        loss -= logp(k, b);
        if (g) (*g)(k, b) -= inv_b;
      }
    }
  }
  return loss * inv_b;
}

double kl_loss(const Matrix& mu, const Matrix& logvar, Matrix* grad_mu,
               Matrix* grad_logvar) {
  if (mu.rows() != logvar.rows() || mu.cols() != logvar.cols()) {
    throw ContractError("kl: mu/logvar shape mismatch");
  }
  const double inv_b = 1.0 / static_cast<double>(mu.cols());
  const auto var = logvar.array().exp();
  const double loss =
      0.5 * (mu.array().square() + var - 1.0 - logvar.array()).sum() * inv_b;
  if (grad_mu) *grad_mu = mu * inv_b;
  if (grad_logvar) *grad_logvar = (0.5 * inv_b * (var - 1.0)).matrix();
  return loss;
}

double feature_loss(const Matrix& estimate, const Matrix& truth, Matrix* grad) {
  if (estimate.rows() != truth.rows() || estimate.cols() != truth.cols()) {
    throw ContractError("feature loss: shape mismatch");
  }
  const double denom = static_cast<double>(estimate.size());
  const Matrix diff = estimate - truth;
  if (grad) *grad = diff * (2.0 / denom);
  return diff.squaredNorm() / denom;
}

double reconstruction_loss(const SoftSequence& soft, const TokenSequence& target) {
  if (soft.size() != target.size()) {
    throw ContractError("reconstruction: length mismatch");
  }
  double loss = 0.0;
  for (std::size_t t = 0; t < target.size(); ++t) {
    for (int s = 0; s < kTokenSlots; ++s) {
      loss -= std::log(soft.steps[t][s][target.steps[t][s]]);
    }
  }
  return loss;
}

double kl_loss(const Vector& mu, const Vector& logvar) {
  return kl_loss(Matrix(mu), Matrix(logvar));
}

double feature_loss(const FeatureVector& estimate, const FeatureVector& truth) {
  if (estimate.names() != truth.names()) {
    throw ContractError("feature loss: feature order mismatch");
  }
  const auto n = static_cast<Eigen::Index>(estimate.size());
  return feature_loss(Matrix(Eigen::Map<const Vector>(estimate.values().data(), n)),
                      Matrix(Eigen::Map<const Vector>(truth.values().data(), n)));
}

namespace {

/// Chain rule through the column softmax: dL/dlogits from dL/dprobs.
void add_softmax_backward(const Matrix& probs, const Matrix& grad_probs,
                          Matrix& grad_logits) {
  const RowVector inner = (probs.array() * grad_probs.array()).colwise().sum();
  grad_logits.array() +=
      probs.array() * (grad_probs.array().rowwise() - inner.array());
}

}  // namespace

LossBreakdown graphtune_phase_loss(const GraphTuneModel& model,
                                   const ModelParams& params,
                                   const TrainingBatch& batch,
                                   const LossWeights& weights,
                                   const Matrix& noise, Gradients* grads) {
  if (!params.frozen(Owner::kEstimator)) {
    throw TrainingContractError(
        "GraphTune phase requires the estimator partition to be frozen");
  }
  EncoderTrace enc;
  model.encoder_forward(params, batch.sequences, batch.condition, enc);
  if (noise.rows() != enc.mu.rows() || noise.cols() != enc.mu.cols()) {
    throw ContractError("noise shape does not match latent batch");
  }
  const Matrix sigma = (0.5 * enc.logvar.array()).exp().matrix();
  const Matrix latent = enc.mu + sigma.cwiseProduct(noise);

  DecoderTrace dec;
  model.decoder_forward(params, latent, batch.condition, batch.sequences, dec);

  LossBreakdown out;
  SlotMatrices grad_logits;
  out.reconstruction = reconstruction_loss(dec.soft, batch.sequences,
                                           grads ? &grad_logits : nullptr);
  Matrix kl_mu, kl_logvar;
  out.kl = kl_loss(enc.mu, enc.logvar, grads ? &kl_mu : nullptr,
                   grads ? &kl_logvar : nullptr);
  out.total = out.reconstruction + weights.kl * out.kl;

  if (weights.feature > 0.0) {
    EstimatorTrace est;
    model.estimator_forward(params, dec.soft, est);
    Matrix grad_est;
    out.feature = feature_loss(est.estimate, batch.condition,
                               grads ? &grad_est : nullptr);
    out.total += weights.feature * *out.feature;
    if (grads) {
      grad_est *= weights.feature;
      auto grad_probs = model.estimator_backward(params, dec.soft, est, grad_est,
                                                 *grads, true);
      for (std::size_t t = 0; t < grad_probs.size(); ++t) {
        for (int s = 0; s < kTokenSlots; ++s) {
          add_softmax_backward(dec.soft.probs[t][s], grad_probs[t][s],
                               grad_logits[t][s]);
        }
      }
    }
  }
  if (!grads) return out;

  const Matrix grad_latent =
      model.decoder_backward(params, batch.sequences, dec, grad_logits, *grads);
  const Matrix grad_mu = grad_latent + weights.kl * kl_mu;
  const Matrix grad_logvar =
      (grad_latent.array() * noise.array() * 0.5 * sigma.array()).matrix() +
      weights.kl * kl_logvar;
  model.encoder_backward(params, batch.sequences, enc, grad_mu, grad_logvar, *grads);
  return out;
}

SoftBatch reconstruct(const GraphTuneModel& model, const ModelParams& params,
                      const TrainingBatch& batch, const Matrix& noise) {
  EncoderTrace enc;
  model.encoder_forward(params, batch.sequences, batch.condition, enc);
  if (noise.rows() != enc.mu.rows() || noise.cols() != enc.mu.cols()) {
    throw ContractError("noise shape does not match latent batch");
  }
  const Matrix latent =
      enc.mu + ((0.5 * enc.logvar.array()).exp() * noise.array()).matrix();
  DecoderTrace dec;
  model.decoder_forward(params, latent, batch.condition, batch.sequences, dec);
  return std::move(dec.soft);
}

double estimator_loss(const GraphTuneModel& model, const ModelParams& params,
                      const SoftBatch& soft, const Matrix& truth,
                      Gradients* grads) {
  EstimatorTrace est;
  model.estimator_forward(params, soft, est);
  Matrix grad_est;
  const double loss = feature_loss(est.estimate, truth, grads ? &grad_est : nullptr);
  if (grads) model.estimator_backward(params, soft, est, grad_est, *grads, false);
  return loss;
}

double estimator_phase_loss(const GraphTuneModel& model,
                            const ModelParams& params,
                            const TrainingBatch& batch, const Matrix& noise,
                            Gradients* grads) {
  if (!params.frozen(Owner::kEncoder) || !params.frozen(Owner::kDecoder)) {
    throw TrainingContractError(
        "estimator phase requires encoder and decoder to be frozen");
  }
  const SoftBatch soft = reconstruct(model, params, batch, noise);
  return estimator_loss(model, params, soft, batch.condition, grads);
}

// ---------------------------------------------------------------------------

AdamState AdamState::zeros_like(const ModelParams& params) {
  AdamState s;
  for (ParamId id = 0; id < params.size(); ++id) {
    const Matrix& v = params.value(id);
    s.first.push_back(Matrix::Zero(v.rows(), v.cols()));
    s.second.push_back(Matrix::Zero(v.rows(), v.cols()));
  }
  return s;
}

void AdamState::apply(ModelParams& params, const Gradients& grads,
                      double learning_rate) {
  constexpr double kBeta1 = 0.9;
  constexpr double kBeta2 = 0.999;
  constexpr double kEps = 1e-8;
  for (Owner o : kAllOwners) {
    if (!params.frozen(o)) ++steps[static_cast<int>(o)];
  }
  for (ParamId id = 0; id < params.size(); ++id) {
    const Owner o = params.owner(id);
    if (params.frozen(o) || !grads.tracks(id)) continue;
    const auto t = static_cast<double>(steps[static_cast<int>(o)]);
    const Matrix& g = grads[id];
    first[id] = kBeta1 * first[id] + (1.0 - kBeta1) * g;
    second[id] = kBeta2 * second[id] + (1.0 - kBeta2) * g.cwiseProduct(g);
    const double c1 = 1.0 - std::pow(kBeta1, t);
    const double c2 = 1.0 - std::pow(kBeta2, t);
    params.value(id).array() -= learning_rate * (first[id].array() / c1) /
                                ((second[id].array() / c2).sqrt() + kEps);
  }
}

ModelConfig configure_for(ModelConfig base, const DatasetManifest& manifest) {
  base.max_nodes = manifest.max_nodes;
  base.max_sequence_length = manifest.max_sequence_length;
  base.condition_dim = static_cast<int>(manifest.feature_order.size());
  base.estimator_out = base.condition_dim;
  return base;
}

namespace {

std::mt19937_64 phase_rng(std::uint64_t seed, int iteration, Phase phase) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed),
                    static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(iteration),
                    static_cast<std::uint32_t>(phase)};
  return std::mt19937_64(seq);
}

Matrix standard_normal(std::mt19937_64& rng, Eigen::Index rows, Eigen::Index cols) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix m(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j) {
    for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = normal(rng);
  }
  return m;
}

std::array<std::uint64_t, 3> partition_hashes(const ModelParams& params) {
  return {params.hash(Owner::kEncoder), params.hash(Owner::kDecoder),
          params.hash(Owner::kEstimator)};
}

void clip(Gradients& grads, double max_norm) {
  const double norm = grads.norm();
  if (norm > max_norm) grads.scale(max_norm / norm);
}

// Shuffled mini-batches with similar lengths grouped together: a random
// permutation is cut into windows of kBucketBatches batches, each window is
// sorted by sequence length, cut into batches, and the batch order shuffled.
// Padding to the longest sequence of a batch is what dominates the cost of a
// step otherwise.
constexpr std::size_t kBucketBatches = 8;

std::vector<std::vector<std::size_t>> shuffled_batches(
    const std::vector<std::size_t>& lengths, int batch_size, std::mt19937_64& rng) {
  const std::size_t n = lengths.size();
  const auto bs = static_cast<std::size_t>(batch_size);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);
  const std::size_t window = bs * kBucketBatches;
  for (std::size_t w = 0; w < n; w += window) {
    const auto first = order.begin() + static_cast<std::ptrdiff_t>(w);
    const auto last = order.begin() + static_cast<std::ptrdiff_t>(std::min(n, w + window));
    std::stable_sort(first, last, [&](std::size_t a, std::size_t b) {
      return lengths[a] < lengths[b];
    });
  }
  std::vector<std::vector<std::size_t>> batches;
  for (std::size_t i = 0; i < n; i += bs) {
    batches.emplace_back(order.begin() + static_cast<std::ptrdiff_t>(i),
                         order.begin() + static_cast<std::ptrdiff_t>(std::min(n, i + bs)));
  }
  std::shuffle(batches.begin(), batches.end(), rng);
  return batches;
}

}  // namespace

TrainResult train_alternate(const DatasetManifest& manifest,
                            const ModelConfig& model_config,
                            const TrainConfig& train_config,
                            const TrainHooks& hooks) {
  if (manifest.records.empty()) throw EmptyDatasetError("manifest is empty");
  train_config.validate();
  if (!(configure_for(model_config, manifest) == model_config)) {
    throw ConfigError("model configuration does not match the manifest "
                      "(use configure_for)");
  }
  const GraphTuneModel model(model_config);

  std::vector<TokenSequence> tokens;
  std::vector<FeatureVector> features;
  for (const auto& r : manifest.records) {
    tokens.push_back(record_tokens(manifest, r));
    if (static_cast<int>(tokens.back().size()) > model_config.max_sequence_length) {
      throw ConfigError("record exceeds max_sequence_length");
    }
    features.push_back(r.features);
  }

  TrainResult result;
  TrainCheckpoint& ck = result.checkpoint;
  ck.model = model_config;
  ck.train = train_config;
  ck.feature_order = manifest.feature_order;
  if (hooks.resume) {
    const TrainCheckpoint& from = *hooks.resume;
    if (!(from.model == model_config) || !(from.train == train_config)) {
      throw ConfigError("resume checkpoint was written with a different configuration");
    }
    model.check_layout(from.params);
    ck.standardizer = from.standardizer;
    ck.params = from.params;
    ck.state = from.state;
  } else {
    ck.standardizer = Standardizer::fit(features);
    ck.params = model.init_params(train_config.seed);
    ck.state.adam = AdamState::zeros_like(ck.params);
  }

  std::vector<Vector> conditions;
  for (const auto& f : features) conditions.push_back(ck.standardizer.apply(f));
  std::vector<std::size_t> lengths;
  for (const auto& t : tokens) lengths.push_back(t.size());

  const std::size_t n = tokens.size();
  const auto batches_per_epoch = static_cast<long long>(
      (n + static_cast<std::size_t>(train_config.batch_size) - 1) /
      static_cast<std::size_t>(train_config.batch_size));
  const double anneal_steps = model_config.kl_anneal_fraction *
                              static_cast<double>(train_config.alternate_iterations) *
                              train_config.graphtune_epochs_per_phase *
                              static_cast<double>(batches_per_epoch);

  ModelParams& params = ck.params;
  TrainState& state = ck.state;
  TrainTrace& trace = result.trace;

  auto check_finite = [&](double loss, const char* what) {
    if (!std::isfinite(loss)) {
      throw DivergenceError(std::string("non-finite ") + what + " loss", trace);
    }
  };

  const int total_phases = 2 * train_config.alternate_iterations;
  for (int p = state.phases_completed; p < total_phases; ++p) {
    const int iteration = p / 2 + 1;
    const Phase phase = p % 2 == 0 ? Phase::kGraphTune : Phase::kEstimator;
    std::mt19937_64 rng = phase_rng(train_config.seed, iteration, phase);
    PhaseBoundary boundary{iteration, phase, partition_hashes(params), {}};

    if (phase == Phase::kGraphTune) {
      params.freeze_only(Owner::kEstimator);
      const double feature_weight =
          iteration == 1 ? 0.0 : train_config.feature_loss_weight;
      for (int epoch = 1; epoch <= train_config.graphtune_epochs_per_phase; ++epoch) {
        double rec = 0.0, kl = 0.0, feat = 0.0;
        for (const auto& idx : shuffled_batches(lengths, train_config.batch_size, rng)) {
          const TrainingBatch batch = make_batch(tokens, conditions, idx);
          const Matrix noise =
              standard_normal(rng, model_config.latent_dim, batch.sequences.batch());
          const double ramp =
              anneal_steps > 0.0
                  ? std::min(1.0, static_cast<double>(state.graphtune_steps) / anneal_steps)
                  : 1.0;
          const LossWeights weights{model_config.kl_weight * ramp, feature_weight};
          Gradients grads(params);
          const LossBreakdown loss =
              graphtune_phase_loss(model, params, batch, weights, noise, &grads);
          check_finite(loss.total, "GraphTune-phase");
          clip(grads, train_config.grad_clip_norm);
          state.adam.apply(params, grads, train_config.learning_rate);
          ++state.graphtune_steps;
          const double w = static_cast<double>(idx.size());
          rec += w * loss.reconstruction;
          kl += w * loss.kl;
          if (loss.feature) feat += w * *loss.feature;
        }
        EpochRecord rec_row;
        rec_row.iteration = iteration;
        rec_row.phase = phase;
        rec_row.epoch = epoch;
        rec_row.reconstruction = rec / static_cast<double>(n);
        rec_row.kl = kl / static_cast<double>(n);
        if (feature_weight > 0.0) rec_row.feature = feat / static_cast<double>(n);
        trace.epochs.push_back(rec_row);
        if (hooks.on_epoch) hooks.on_epoch(rec_row);
      }
    } else {
      params.freeze_all_except(Owner::kEstimator);
      // The GraphTune part is frozen for the whole phase, so each record's
      // reconstruction (one latent draw per record) is computed once.
      std::vector<SoftSequence> cache(n);
      for (std::size_t i = 0; i < n; i += static_cast<std::size_t>(train_config.batch_size)) {
        std::vector<std::size_t> idx(
            std::min(n - i, static_cast<std::size_t>(train_config.batch_size)));
        std::iota(idx.begin(), idx.end(), i);
        const TrainingBatch batch = make_batch(tokens, conditions, idx);
        const Matrix noise =
            standard_normal(rng, model_config.latent_dim, batch.sequences.batch());
        const SoftBatch soft = reconstruct(model, params, batch, noise);
        for (std::size_t b = 0; b < idx.size(); ++b) {
          cache[idx[b]] = soft_sequence_at(soft, static_cast<int>(b),
                                           batch.sequences.lengths[b],
                                           model_config.max_nodes);
        }
      }
      for (int epoch = 1; epoch <= train_config.estimator_epochs_per_phase; ++epoch) {
        double total = 0.0;
        for (const auto& idx : shuffled_batches(lengths, train_config.batch_size, rng)) {
          std::vector<const SoftSequence*> soft_in;
          Matrix truth(model_config.condition_dim, static_cast<Eigen::Index>(idx.size()));
          for (std::size_t b = 0; b < idx.size(); ++b) {
            soft_in.push_back(&cache[idx[b]]);
            truth.col(static_cast<Eigen::Index>(b)) = conditions[idx[b]];
          }
          const SoftBatch soft = to_soft_batch(soft_in);
          Gradients grads(params);
          const double loss = estimator_loss(model, params, soft, truth, &grads);
          check_finite(loss, "estimator-phase");
          clip(grads, train_config.grad_clip_norm);
          state.adam.apply(params, grads, train_config.learning_rate);
          total += static_cast<double>(idx.size()) * loss;
        }
        EpochRecord row;
        row.iteration = iteration;
        row.phase = phase;
        row.epoch = epoch;
        row.estimator = total / static_cast<double>(n);
        trace.epochs.push_back(row);
        if (hooks.on_epoch) hooks.on_epoch(row);
      }
    }

    boundary.hash_after = partition_hashes(params);
    trace.boundaries.push_back(boundary);
    state.phases_completed = p + 1;
    if (!params.all_finite()) {
      throw DivergenceError("non-finite parameters after phase", trace);
    }
    if (hooks.on_phase_end) hooks.on_phase_end(ck);
  }
  for (Owner o : kAllOwners) params.set_frozen(o, false);
  return result;
}

}  // namespace graphtune
