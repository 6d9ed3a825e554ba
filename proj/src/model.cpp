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

#include "graphtune/model.hpp"

#include <cmath>
#include <string>

#include "graphtune/error.hpp"

namespace graphtune {

void ModelConfig::validate() const {
  auto positive = [](int v, const char* what) {
    if (v < 1) throw ConfigError(std::string(what) + " must be >= 1");
  };
  positive(latent_dim, "latent_dim");
  positive(encoder_hidden, "encoder_hidden");
  positive(decoder_hidden, "decoder_hidden");
  positive(embedding_dim, "embedding_dim");
  positive(estimator_pre_fc, "estimator_pre_fc");
  positive(estimator_hidden, "estimator_hidden");
  positive(estimator_out, "estimator_out");
  positive(condition_dim, "condition_dim");
  positive(max_nodes, "max_nodes");
  positive(max_sequence_length, "max_sequence_length");
  if (estimator_out != condition_dim) {
    throw ConfigError("estimator_out must equal condition_dim");
  }
  if (!std::isfinite(kl_weight) || kl_weight < 0.0) {
    throw ConfigError("kl_weight must be finite and >= 0");
  }
  if (!(kl_anneal_fraction >= 0.0 && kl_anneal_fraction <= 1.0)) {
    throw ConfigError("kl_anneal_fraction must be in [0, 1]");
  }
}

// ---------------------------------------------------------------------------

Standardizer Standardizer::fit(std::span<const FeatureVector> rows) {
  if (rows.empty()) throw EmptyDatasetError("cannot standardize zero rows");
  const std::size_t dims = rows[0].size();
  Standardizer s;
  s.mean.assign(dims, 0.0);
  s.scale.assign(dims, 1.0);
  for (std::size_t d = 0; d < dims; ++d) {
    double sum = 0.0;
    for (const auto& r : rows) sum += r.value(d);
    const double mean = sum / static_cast<double>(rows.size());
    double sq = 0.0;
    for (const auto& r : rows) sq += (r.value(d) - mean) * (r.value(d) - mean);
    const double sd =
        rows.size() > 1 ? std::sqrt(sq / static_cast<double>(rows.size() - 1)) : 0.0;
    s.mean[d] = mean;
    s.scale[d] = sd > 0.0 ? sd : 1.0;
  }
  return s;
}

Standardizer Standardizer::identity(std::size_t dims) {
  return {std::vector<double>(dims, 0.0), std::vector<double>(dims, 1.0)};
}

Vector Standardizer::apply(std::span<const double> raw) const {
  if (raw.size() != mean.size()) {
    throw ContractError("condition has " + std::to_string(raw.size()) +
                        " entries, standardizer expects " +
                        std::to_string(mean.size()));
  }
  Vector out(static_cast<Eigen::Index>(raw.size()));
  for (std::size_t d = 0; d < raw.size(); ++d) {
    out[static_cast<Eigen::Index>(d)] = (raw[d] - mean[d]) / scale[d];
  }
  return out;
}

std::vector<double> Standardizer::invert(const Vector& standardized) const {
  std::vector<double> out(mean.size());
  for (std::size_t d = 0; d < mean.size(); ++d) {
    out[d] = standardized[static_cast<Eigen::Index>(d)] * scale[d] + mean[d];
  }
  return out;
}

// ---------------------------------------------------------------------------

SequenceBatch SequenceBatch::from(std::span<const TokenSequence* const> seqs) {
  SequenceBatch batch;
  if (seqs.empty()) throw ContractError("empty sequence batch");
  batch.max_nodes = seqs[0]->max_nodes;
  std::size_t T = 0;
  for (const auto* s : seqs) {
    if (s->max_nodes != batch.max_nodes) {
      throw ContractError("sequences disagree on max_nodes");
    }
    if (s->steps.empty()) throw ContractError("empty token sequence");
    T = std::max(T, s->steps.size());
    batch.lengths.push_back(static_cast<int>(s->steps.size()));
  }
  const auto B = static_cast<Eigen::Index>(seqs.size());
  const TokenStep pad = end_step(batch.max_nodes);
  batch.tokens.assign(T, std::vector<TokenStep>(seqs.size(), pad));
  batch.mask.assign(T, RowVector::Zero(B));
  for (std::size_t b = 0; b < seqs.size(); ++b) {
    for (std::size_t t = 0; t < seqs[b]->steps.size(); ++t) {
      batch.tokens[t][b] = seqs[b]->steps[t];
      batch.mask[t][static_cast<Eigen::Index>(b)] = 1.0;
    }
  }
  return batch;
}

SequenceBatch SequenceBatch::from(const TokenSequence& seq) {
  const TokenSequence* one[] = {&seq};
  return from(std::span<const TokenSequence* const>(one));
}

SoftSequence SoftSequence::one_hot(const TokenSequence& seq) {
  SoftSequence soft;
  soft.max_nodes = seq.max_nodes;
  const auto vocab = token_vocab_sizes(seq.max_nodes);
  for (const auto& step : seq.steps) {
    std::array<Vector, kTokenSlots> slots;
    for (int s = 0; s < kTokenSlots; ++s) {
      slots[s] = Vector::Zero(vocab[s]);
      slots[s][step[s]] = 1.0;
    }
    soft.steps.push_back(std::move(slots));
  }
  return soft;
}

void SoftSequence::check() const {
  const auto vocab = token_vocab_sizes(max_nodes);
  if (steps.empty()) throw ContractError("empty soft sequence");
  for (std::size_t t = 0; t < steps.size(); ++t) {
    for (int s = 0; s < kTokenSlots; ++s) {
      const Vector& p = steps[t][s];
      if (p.size() != vocab[s]) {
        throw ContractError("soft step " + std::to_string(t) + " slot " +
                            std::to_string(s) + " has wrong vocabulary size");
      }
      if ((p.array() < 0.0).any() || std::abs(p.sum() - 1.0) > 1e-6) {
        throw ContractError("soft step " + std::to_string(t) + " slot " +
                            std::to_string(s) + " is not a distribution");
      }
    }
  }
}

SoftBatch to_soft_batch(std::span<const SoftSequence* const> seqs) {
  if (seqs.empty()) throw ContractError("empty soft batch");
  const int max_nodes = seqs[0]->max_nodes;
  const auto vocab = token_vocab_sizes(max_nodes);
  std::size_t T = 0;
  for (const auto* s : seqs) {
    if (s->max_nodes != max_nodes) throw ContractError("soft batch max_nodes mismatch");
    T = std::max(T, s->size());
  }
  const auto B = static_cast<Eigen::Index>(seqs.size());
  SoftBatch batch;
  batch.probs.resize(T);
  batch.mask.assign(T, RowVector::Zero(B));
  for (std::size_t t = 0; t < T; ++t) {
    for (int s = 0; s < kTokenSlots; ++s) {
      Matrix& m = batch.probs[t][s];
      m = Matrix::Zero(vocab[s], B);
      m.row(vocab[s] - 1).setOnes();  // padding: end symbol
    }
  }
  for (Eigen::Index b = 0; b < B; ++b) {
    const SoftSequence& seq = *seqs[b];
    for (std::size_t t = 0; t < seq.size(); ++t) {
      for (int s = 0; s < kTokenSlots; ++s) batch.probs[t][s].col(b) = seq.steps[t][s];
      batch.mask[t][b] = 1.0;
    }
  }
  return batch;
}

SoftSequence soft_sequence_at(const SoftBatch& batch, int column, int length,
                              int max_nodes) {
  SoftSequence soft;
  soft.max_nodes = max_nodes;
  for (int t = 0; t < length; ++t) {
    std::array<Vector, kTokenSlots> slots;
    for (int s = 0; s < kTokenSlots; ++s) slots[s] = batch.probs[t][s].col(column);
    soft.steps.push_back(std::move(slots));
  }
  return soft;
}

// ---------------------------------------------------------------------------

SlotSampler argmax_sampler() {
  return [](const Vector& logits) {
    Eigen::Index best = 0;
    logits.maxCoeff(&best);
    return static_cast<int>(best);
  };
}

SlotSampler categorical_sampler(std::mt19937_64& rng, double temperature) {
  if (!(temperature > 0.0)) throw ConfigError("temperature must be > 0");
  return [&rng, temperature](const Vector& logits) {
    const Vector scaled = logits / temperature;
    const Vector p = (scaled.array() - scaled.maxCoeff()).exp().matrix();
    std::uniform_real_distribution<double> unit(0.0, p.sum());
    double u = unit(rng);
    for (Eigen::Index k = 0; k < p.size(); ++k) {
      u -= p[k];
      if (u < 0.0) return static_cast<int>(k);
    }
    return static_cast<int>(p.size() - 1);
  };
}

// ---------------------------------------------------------------------------

GraphTuneModel::GraphTuneModel(ModelConfig config) : config_(config) {
  config_.validate();
  vocab_ = config_.vocab();
  build_layout();
}

ParamId GraphTuneModel::declare(std::string name, Owner owner, int rows,
                                int cols, int fan_in, bool forget_bias) {
  layout_.push_back({std::move(name), owner, rows, cols, fan_in, forget_bias});
  return layout_.size() - 1;
}

nn::Affine GraphTuneModel::declare_affine(const std::string& name, Owner owner,
                                          int out, int in) {
  nn::Affine a;
  a.weight = declare(name + ".weight", owner, out, in, in);
  a.bias = declare(name + ".bias", owner, out, 1, in);
  return a;
}

nn::Lstm GraphTuneModel::declare_lstm(const std::string& name, Owner owner,
                                      int in, int hidden) {
  nn::Lstm l;
  l.input = in;
  l.hidden = hidden;
  l.weight = declare(name + ".weight", owner, 4 * hidden, in + hidden, in + hidden);
  l.bias = declare(name + ".bias", owner, 4 * hidden, 1, in + hidden, true);
  return l;
}

void GraphTuneModel::build_layout() {
  const int E = config_.embedding_dim;
  const int C = config_.condition_dim;
  const int L = config_.latent_dim;
  const int tokens_in = kTokenSlots * E;

  for (int s = 0; s < kTokenSlots; ++s) {
    encoder_.embedding[s] = declare("encoder.embedding." + std::to_string(s),
                                    Owner::kEncoder, E, vocab_[s], vocab_[s]);
  }
  encoder_.lstm = declare_lstm("encoder.lstm", Owner::kEncoder, tokens_in + C,
                               config_.encoder_hidden);
  encoder_.mu = declare_affine("encoder.mu", Owner::kEncoder, L, config_.encoder_hidden);
  encoder_.logvar =
      declare_affine("encoder.logvar", Owner::kEncoder, L, config_.encoder_hidden);

  for (int s = 0; s < kTokenSlots; ++s) {
    decoder_.embedding[s] = declare("decoder.embedding." + std::to_string(s),
                                    Owner::kDecoder, E, vocab_[s], vocab_[s]);
  }
  decoder_.init = declare_affine("decoder.init", Owner::kDecoder, tokens_in, L + C);
  decoder_.lstm = declare_lstm("decoder.lstm", Owner::kDecoder, tokens_in + L + C,
                               config_.decoder_hidden);
  for (int s = 0; s < kTokenSlots; ++s) {
    decoder_.head[s] = declare_affine("decoder.head." + std::to_string(s),
                                      Owner::kDecoder, vocab_[s],
                                      config_.decoder_hidden);
  }

  for (int s = 0; s < kTokenSlots; ++s) {
    estimator_.embedding[s] = declare("estimator.embedding." + std::to_string(s),
                                      Owner::kEstimator, E, vocab_[s], vocab_[s]);
  }
  estimator_.pre = declare_affine("estimator.pre", Owner::kEstimator,
                                  config_.estimator_pre_fc, tokens_in);
  estimator_.lstm = declare_lstm("estimator.lstm", Owner::kEstimator,
                                 config_.estimator_pre_fc, config_.estimator_hidden);
  estimator_.head = declare_affine("estimator.head", Owner::kEstimator,
                                   config_.estimator_out, config_.estimator_hidden);
}

ModelParams GraphTuneModel::zero_params() const {
  ModelParams params;
  for (const auto& slot : layout_) params.add(slot.name, slot.owner, slot.rows, slot.cols);
  return params;
}

ModelParams GraphTuneModel::init_params(std::uint64_t seed) const {
  ModelParams params = zero_params();
  std::mt19937_64 rng(seed);
  for (ParamId id = 0; id < layout_.size(); ++id) {
    const Slot& slot = layout_[id];
    const double bound = 1.0 / std::sqrt(static_cast<double>(slot.fan_in));
    std::uniform_real_distribution<double> dist(-bound, bound);
    Matrix& m = params.value(id);
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      for (Eigen::Index i = 0; i < m.rows(); ++i) m(i, j) = dist(rng);
    }
    if (slot.forget_bias) {
      const int H = slot.rows / 4;
      m.middleRows(H, H).setOnes();
    }
  }
  return params;
}

void GraphTuneModel::check_layout(const ModelParams& params) const {
  if (params.size() != layout_.size()) {
    throw ConfigError("parameter count " + std::to_string(params.size()) +
                      " does not match model layout " +
                      std::to_string(layout_.size()));
  }
  for (ParamId id = 0; id < layout_.size(); ++id) {
    const Slot& slot = layout_[id];
    const Matrix& m = params.value(id);
    if (params.name(id) != slot.name || params.owner(id) != slot.owner ||
        m.rows() != slot.rows || m.cols() != slot.cols) {
      throw ConfigError("parameter " + params.name(id) +
                        " does not match model layout entry " + slot.name);
    }
  }
}

Matrix GraphTuneModel::embed_tokens(const ModelParams& params,
                                    const std::array<ParamId, kTokenSlots>& table,
                                    const std::vector<TokenStep>& step) const {
  const int E = config_.embedding_dim;
  const auto B = static_cast<Eigen::Index>(step.size());
  Matrix out(kTokenSlots * E, B);
  for (int s = 0; s < kTokenSlots; ++s) {
    const Matrix& emb = params.value(table[s]);
    for (Eigen::Index b = 0; b < B; ++b) {
      out.block(s * E, b, E, 1) = emb.col(step[b][s]);
    }
  }
  return out;
}

void GraphTuneModel::scatter_embedding_grads(
    const std::array<ParamId, kTokenSlots>& table,
    const std::vector<TokenStep>& step, const Matrix& grad,
    Gradients& grads) const {
  const int E = config_.embedding_dim;
  for (int s = 0; s < kTokenSlots; ++s) {
    if (!grads.tracks(table[s])) continue;
    Matrix& g = grads[table[s]];
    for (std::size_t b = 0; b < step.size(); ++b) {
      g.col(step[b][s]) += grad.block(s * E, static_cast<Eigen::Index>(b), E, 1);
    }
  }
}

void GraphTuneModel::encoder_forward(const ModelParams& params,
                                     const SequenceBatch& batch,
                                     const Matrix& condition,
                                     EncoderTrace& trace) const {
  const auto B = static_cast<Eigen::Index>(batch.batch());
  if (condition.rows() != config_.condition_dim || condition.cols() != B) {
    throw ConfigError("encoder condition has shape " +
                      std::to_string(condition.rows()) + "x" +
                      std::to_string(condition.cols()));
  }
  if (batch.max_nodes != config_.max_nodes) {
    throw ConfigError("sequence max_nodes differs from model configuration");
  }
  const int tokens_in = kTokenSlots * config_.embedding_dim;
  trace.inputs.resize(batch.steps());
  for (std::size_t t = 0; t < batch.steps(); ++t) {
    Matrix& x = trace.inputs[t];
    x.resize(tokens_in + config_.condition_dim, B);
    x.topRows(tokens_in) = embed_tokens(params, encoder_.embedding, batch.tokens[t]);
    x.bottomRows(config_.condition_dim) = condition;
  }
  nn::lstm_forward(params, encoder_.lstm, trace.inputs, &batch.mask, trace.lstm);
  trace.final_hidden = trace.lstm.hidden.back();
  trace.mu = nn::affine_forward(params, encoder_.mu, trace.final_hidden);
  trace.logvar = nn::affine_forward(params, encoder_.logvar, trace.final_hidden);
}

void GraphTuneModel::encoder_backward(const ModelParams& params,
                                      const SequenceBatch& batch,
                                      const EncoderTrace& trace,
                                      const Matrix& grad_mu,
                                      const Matrix& grad_logvar,
                                      Gradients& grads) const {
  Matrix dh = nn::affine_backward(params, encoder_.mu, trace.final_hidden,
                                  grad_mu, grads, true);
  dh += nn::affine_backward(params, encoder_.logvar, trace.final_hidden,
                            grad_logvar, grads, true);
  std::vector<Matrix> grad_hidden(batch.steps());
  grad_hidden.back() = std::move(dh);
  bool want_inputs = false;
  for (ParamId id : encoder_.embedding) want_inputs = want_inputs || grads.tracks(id);
  auto dx = nn::lstm_backward(params, encoder_.lstm, trace.lstm, grad_hidden,
                              grads, want_inputs);
  if (!want_inputs) return;
  for (std::size_t t = 0; t < batch.steps(); ++t) {
    scatter_embedding_grads(encoder_.embedding, batch.tokens[t], dx[t], grads);
  }
}

void GraphTuneModel::decoder_forward(const ModelParams& params,
                                     const Matrix& latent,
                                     const Matrix& condition,
                                     const SequenceBatch& teacher,
                                     DecoderTrace& trace) const {
  const auto B = static_cast<Eigen::Index>(teacher.batch());
  const int L = config_.latent_dim;
  const int C = config_.condition_dim;
  if (latent.rows() != L || latent.cols() != B || condition.rows() != C ||
      condition.cols() != B) {
    throw ConfigError("decoder latent/condition shape mismatch");
  }
  if (teacher.max_nodes != config_.max_nodes) {
    throw ConfigError("teacher max_nodes differs from model configuration");
  }
  const int tokens_in = kTokenSlots * config_.embedding_dim;
  trace.zc.resize(L + C, B);
  trace.zc.topRows(L) = latent;
  trace.zc.bottomRows(C) = condition;
  trace.init_input = nn::affine_forward(params, decoder_.init, trace.zc);

  const std::size_t T = teacher.steps();
  trace.inputs.resize(T);
  for (std::size_t t = 0; t < T; ++t) {
    Matrix& x = trace.inputs[t];
    x.resize(tokens_in + L + C, B);
    x.topRows(tokens_in) =
        t == 0 ? trace.init_input
               : embed_tokens(params, decoder_.embedding, teacher.tokens[t - 1]);
    x.bottomRows(L + C) = trace.zc;
  }
  nn::lstm_forward(params, decoder_.lstm, trace.inputs, nullptr, trace.lstm);

  SoftBatch& soft = trace.soft;
  soft.probs.resize(T);
  soft.log_probs.resize(T);
  soft.mask = teacher.mask;
  for (std::size_t t = 0; t < T; ++t) {
    for (int s = 0; s < kTokenSlots; ++s) {
      soft.log_probs[t][s] = nn::log_softmax(
          nn::affine_forward(params, decoder_.head[s], trace.lstm.hidden[t]));
      soft.probs[t][s] = soft.log_probs[t][s].array().exp().matrix();
    }
  }
}

Matrix GraphTuneModel::decoder_backward(
    const ModelParams& params, const SequenceBatch& teacher,
    const DecoderTrace& trace,
    const std::vector<std::array<Matrix, kTokenSlots>>& grad_logits,
    Gradients& grads) const {
  const std::size_t T = teacher.steps();
  const int L = config_.latent_dim;
  const int C = config_.condition_dim;
  const int tokens_in = kTokenSlots * config_.embedding_dim;

  std::vector<Matrix> grad_hidden(T);
  for (std::size_t t = 0; t < T; ++t) {
    for (int s = 0; s < kTokenSlots; ++s) {
      Matrix dh = nn::affine_backward(params, decoder_.head[s],
                                      trace.lstm.hidden[t], grad_logits[t][s],
                                      grads, true);
      if (s == 0) {
        grad_hidden[t] = std::move(dh);
      } else {
        grad_hidden[t] += dh;
      }
    }
  }
  auto dx = nn::lstm_backward(params, decoder_.lstm, trace.lstm, grad_hidden,
                              grads, true);
  Matrix dzc = Matrix::Zero(L + C, trace.zc.cols());
  for (std::size_t t = 0; t < T; ++t) {
    dzc += dx[t].bottomRows(L + C);
    if (t == 0) {
      dzc += nn::affine_backward(params, decoder_.init, trace.zc,
                                 dx[0].topRows(tokens_in), grads, true);
    } else {
      scatter_embedding_grads(decoder_.embedding, teacher.tokens[t - 1],
                              dx[t].topRows(tokens_in), grads);
    }
  }
  return dzc.topRows(L);
}

void GraphTuneModel::estimator_forward(const ModelParams& params,
                                       const SoftBatch& soft,
                                       EstimatorTrace& trace) const {
  const std::size_t T = soft.probs.size();
  if (T == 0) throw ConfigError("estimator input is empty");
  const int E = config_.embedding_dim;
  const Eigen::Index B = soft.probs[0][0].cols();
  trace.embedded.resize(T);
  trace.pre.resize(T);
  for (std::size_t t = 0; t < T; ++t) {
    Matrix& x = trace.embedded[t];
    x.resize(kTokenSlots * E, B);
    for (int s = 0; s < kTokenSlots; ++s) {
      const Matrix& p = soft.probs[t][s];
      if (p.rows() != vocab_[s] || p.cols() != B) {
        throw ConfigError("estimator input slot " + std::to_string(s) +
                          " has wrong shape");
      }
      x.middleRows(s * E, E).noalias() = params.value(estimator_.embedding[s]) * p;
    }
    trace.pre[t] = nn::affine_forward(params, estimator_.pre, x);
  }
  nn::lstm_forward(params, estimator_.lstm, trace.pre, &soft.mask, trace.lstm);
  trace.final_hidden = trace.lstm.hidden.back();
  trace.estimate = nn::affine_forward(params, estimator_.head, trace.final_hidden);
}

std::vector<std::array<Matrix, kTokenSlots>> GraphTuneModel::estimator_backward(
    const ModelParams& params, const SoftBatch& soft,
    const EstimatorTrace& trace, const Matrix& grad_estimate, Gradients& grads,
    bool want_probs) const {
  const std::size_t T = soft.probs.size();
  const int E = config_.embedding_dim;
  Matrix dh = nn::affine_backward(params, estimator_.head, trace.final_hidden,
                                  grad_estimate, grads, true);
  std::vector<Matrix> grad_hidden(T);
  grad_hidden.back() = std::move(dh);

  bool embeddings_tracked = false;
  for (ParamId id : estimator_.embedding) {
    embeddings_tracked = embeddings_tracked || grads.tracks(id);
  }
  const bool need_embedded_grad = want_probs || embeddings_tracked;
  const bool need_pre_grad = need_embedded_grad || grads.tracks(estimator_.pre.weight) ||
                             grads.tracks(estimator_.pre.bias);

  std::vector<std::array<Matrix, kTokenSlots>> grad_probs;
  if (want_probs) grad_probs.resize(T);
  if (!need_pre_grad) {
    nn::lstm_backward(params, estimator_.lstm, trace.lstm, grad_hidden, grads, false);
    return grad_probs;
  }
  auto dpre = nn::lstm_backward(params, estimator_.lstm, trace.lstm, grad_hidden,
                                grads, true);
  for (std::size_t t = 0; t < T; ++t) {
    Matrix dx = nn::affine_backward(params, estimator_.pre, trace.embedded[t],
                                    dpre[t], grads, need_embedded_grad);
    if (!need_embedded_grad) continue;
    for (int s = 0; s < kTokenSlots; ++s) {
      const ParamId table = estimator_.embedding[s];
      const auto block = dx.middleRows(s * E, E);
      if (grads.tracks(table)) {
        grads[table].noalias() += block * soft.probs[t][s].transpose();
      }
      if (want_probs) grad_probs[t][s] = params.value(table).transpose() * block;
    }
  }
  return grad_probs;
}

GraphTuneModel::Posterior GraphTuneModel::encode(const ModelParams& params,
                                                 const TokenSequence& seq,
                                                 const Vector& condition) const {
  EncoderTrace trace;
  encoder_forward(params, SequenceBatch::from(seq), condition, trace);
  return {trace.mu.col(0), trace.logvar.col(0)};
}

SoftSequence GraphTuneModel::decode_teacher_forced(const ModelParams& params,
                                                   const Vector& latent,
                                                   const Vector& condition,
                                                   const TokenSequence& teacher) const {
  DecoderTrace trace;
  decoder_forward(params, latent, condition, SequenceBatch::from(teacher), trace);
  return soft_sequence_at(trace.soft, 0, static_cast<int>(teacher.size()),
                          teacher.max_nodes);
}

TokenSequence GraphTuneModel::generate(const ModelParams& params,
                                       const Vector& latent,
                                       const Vector& condition,
                                       const SlotSampler& sampler,
                                       int max_steps) const {
  const int L = config_.latent_dim;
  const int C = config_.condition_dim;
  if (latent.size() != L || condition.size() != C) {
    throw ConfigError("generate: latent/condition size mismatch");
  }
  if (max_steps < 0 || max_steps > config_.max_sequence_length) {
    throw ConfigError("generate: max_steps outside [0, max_sequence_length]");
  }
  const int E = config_.embedding_dim;
  const int tokens_in = kTokenSlots * E;

  Vector zc(L + C);
  zc << latent, condition;
  Vector x(tokens_in + L + C);
  x << params.value(decoder_.init.weight) * zc + params.value(decoder_.init.bias).col(0), zc;

  Vector h = Vector::Zero(config_.decoder_hidden);
  Vector c = Vector::Zero(config_.decoder_hidden);
  TokenSequence seq;
  seq.max_nodes = config_.max_nodes;
  while (static_cast<int>(seq.steps.size()) < max_steps) {
    nn::lstm_step(params, decoder_.lstm, x, h, c);
    TokenStep step{};
    for (int s = 0; s < kTokenSlots; ++s) {
      const Vector logits = params.value(decoder_.head[s].weight) * h +
                            params.value(decoder_.head[s].bias).col(0);
      step[s] = sampler(logits);
      if (s == kFromTime && step[s] == config_.max_nodes) break;
    }
    if (is_end_step(step, config_.max_nodes)) break;
    seq.steps.push_back(step);
    for (int s = 0; s < kTokenSlots; ++s) {
      x.segment(s * E, E) = params.value(decoder_.embedding[s]).col(step[s]);
    }
  }
  seq.steps.push_back(end_step(config_.max_nodes));
  return seq;
}

Vector GraphTuneModel::estimate(const ModelParams& params,
                                const SoftSequence& soft) const {
  if (soft.max_nodes != config_.max_nodes) {
    throw ConfigError("soft sequence max_nodes differs from model configuration");
  }
  const SoftSequence* one[] = {&soft};
  EstimatorTrace trace;
  estimator_forward(params, to_soft_batch(one), trace);
  return trace.estimate.col(0);
}

Vector reparameterize(const Vector& mu, const Vector& logvar, const Vector& noise) {
  if (mu.size() != logvar.size() || mu.size() != noise.size()) {
    throw ContractError("reparameterize: dimension mismatch");
  }
  return mu + ((0.5 * logvar.array()).exp() * noise.array()).matrix();
}

}  // namespace graphtune
