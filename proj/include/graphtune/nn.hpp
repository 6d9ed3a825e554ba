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

#include <vector>

#include "graphtune/params.hpp"

// Batched layer primitives with hand-written backward passes. Activations
// are column-major: one column per batch item.

namespace graphtune::nn {

struct Affine {
  ParamId weight;  // out x in
  ParamId bias;    // out x 1
};

Matrix affine_forward(const ModelParams& params, const Affine& layer,
                      const Matrix& input);

/// Accumulates weight/bias gradients (when tracked) and returns the input
/// gradient if `want_input` is set (otherwise an empty matrix).
Matrix affine_backward(const ModelParams& params, const Affine& layer,
                       const Matrix& input, const Matrix& grad_output,
                       Gradients& grads, bool want_input);

/// Column-wise log-softmax.
Matrix log_softmax(const Matrix& logits);

/// Gate layout in the stacked weight: input, forget, cell, output.
struct Lstm {
  ParamId weight;  // 4H x (in + H), acting on [x; h_prev]
  ParamId bias;    // 4H x 1
  int input = 0;
  int hidden = 0;
};

/// Per-step activations of a batched LSTM pass. When a mask is supplied, a
/// column whose mask entry is 0 carries its previous (h, c) unchanged, so the
/// last state equals the state after each sequence's own final step.
struct LstmTrace {
  std::vector<Matrix> xh;
  std::vector<Matrix> in_gate, forget_gate, cell_gate, out_gate;
  std::vector<Matrix> tanh_cell;
  std::vector<Matrix> cell;    // post-mask c_t
  std::vector<Matrix> hidden;  // post-mask h_t
  std::vector<RowVector> mask;
  int batch = 0;

  std::size_t steps() const { return hidden.size(); }
};

void lstm_forward(const ModelParams& params, const Lstm& layer,
                  const std::vector<Matrix>& inputs,
                  const std::vector<RowVector>* mask, LstmTrace& trace);

/// `grad_hidden[t]` is the loss gradient w.r.t. hidden[t] (empty = zero).
/// Returns per-step input gradients when `want_inputs` is set.
std::vector<Matrix> lstm_backward(const ModelParams& params, const Lstm& layer,
                                  const LstmTrace& trace,
                                  const std::vector<Matrix>& grad_hidden,
                                  Gradients& grads, bool want_inputs);

/// Single unbatched step used by autoregressive generation.
void lstm_step(const ModelParams& params, const Lstm& layer, const Vector& x,
               Vector& h, Vector& c);

}  // namespace graphtune::nn
