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

#include "graphtune/nn.hpp"

#include <cmath>

namespace graphtune::nn {

namespace {

Matrix sigmoid(const Matrix& x) {
  return (1.0 + (-x.array()).exp()).inverse().matrix();
}

}  // namespace

Matrix affine_forward(const ModelParams& params, const Affine& layer,
                      const Matrix& input) {
  Matrix out = params.value(layer.weight) * input;
  out.colwise() += params.value(layer.bias).col(0);
  return out;
}

Matrix affine_backward(const ModelParams& params, const Affine& layer,
                       const Matrix& input, const Matrix& grad_output,
                       Gradients& grads, bool want_input) {
  if (grads.tracks(layer.weight)) {
    grads[layer.weight].noalias() += grad_output * input.transpose();
  }
  if (grads.tracks(layer.bias)) {
    grads[layer.bias].col(0) += grad_output.rowwise().sum();
  }
  if (!want_input) return Matrix();
  return params.value(layer.weight).transpose() * grad_output;
}

Matrix log_softmax(const Matrix& logits) {
  Matrix out(logits.rows(), logits.cols());
  for (Eigen::Index b = 0; b < logits.cols(); ++b) {
    const double peak = logits.col(b).maxCoeff();
    const double lse =
        peak + std::log((logits.col(b).array() - peak).exp().sum());
    out.col(b) = logits.col(b).array() - lse;
  }
  return out;
}

void lstm_forward(const ModelParams& params, const Lstm& layer,
                  const std::vector<Matrix>& inputs,
                  const std::vector<RowVector>* mask, LstmTrace& trace) {
  const int H = layer.hidden;
  const std::size_t T = inputs.size();
  const Eigen::Index B = T ? inputs[0].cols() : 0;
  const Matrix& W = params.value(layer.weight);
  const auto bias = params.value(layer.bias).col(0);

  trace = LstmTrace();
  trace.batch = static_cast<int>(B);
  for (auto* v : {&trace.xh, &trace.in_gate, &trace.forget_gate,
                  &trace.cell_gate, &trace.out_gate, &trace.tanh_cell,
                  &trace.cell, &trace.hidden}) {
    v->resize(T);
  }
  if (mask) trace.mask = *mask;

  Matrix h = Matrix::Zero(H, B);
  Matrix c = Matrix::Zero(H, B);
  for (std::size_t t = 0; t < T; ++t) {
    Matrix& xh = trace.xh[t];
    xh.resize(layer.input + H, B);
    xh.topRows(layer.input) = inputs[t];
    xh.bottomRows(H) = h;

    Matrix a = W * xh;
    a.colwise() += bias;
    trace.in_gate[t] = sigmoid(a.middleRows(0, H));
    trace.forget_gate[t] = sigmoid(a.middleRows(H, H));
    trace.cell_gate[t] = a.middleRows(2 * H, H).array().tanh().matrix();
    trace.out_gate[t] = sigmoid(a.middleRows(3 * H, H));

    Matrix c_new = trace.forget_gate[t].cwiseProduct(c) +
                   trace.in_gate[t].cwiseProduct(trace.cell_gate[t]);
    trace.tanh_cell[t] = c_new.array().tanh().matrix();
    Matrix h_new = trace.out_gate[t].cwiseProduct(trace.tanh_cell[t]);

    if (mask) {
      const RowVector& m = (*mask)[t];
      for (Eigen::Index b = 0; b < B; ++b) {
        if (m[b] != 0.0) {
          c.col(b) = c_new.col(b);
          h.col(b) = h_new.col(b);
        }
      }
    } else {
      c = std::move(c_new);
      h = std::move(h_new);
    }
    trace.cell[t] = c;
    trace.hidden[t] = h;
  }
}

std::vector<Matrix> lstm_backward(const ModelParams& params, const Lstm& layer,
                                  const LstmTrace& trace,
                                  const std::vector<Matrix>& grad_hidden,
                                  Gradients& grads, bool want_inputs) {
  const int H = layer.hidden;
  const std::size_t T = trace.steps();
  const Eigen::Index B = trace.batch;
  const Matrix& W = params.value(layer.weight);
  const bool track_w = grads.tracks(layer.weight);
  const bool track_b = grads.tracks(layer.bias);
  const bool masked = !trace.mask.empty();

  std::vector<Matrix> grad_inputs;
  if (want_inputs) grad_inputs.resize(T);

  Matrix dh = Matrix::Zero(H, B);
  Matrix dc = Matrix::Zero(H, B);
  Matrix da(4 * H, B);
  for (std::size_t t = T; t-- > 0;) {
    if (t < grad_hidden.size() && grad_hidden[t].size() != 0) dh += grad_hidden[t];

    // Split carried gradients into the fresh-update part and the part that
    // bypasses this step for masked columns.
    Matrix dh_new = dh;
    Matrix dc_new = dc;
    Matrix dh_skip, dc_skip;
    if (masked) {
      dh_skip = Matrix::Zero(H, B);
      dc_skip = Matrix::Zero(H, B);
      const RowVector& m = trace.mask[t];
      for (Eigen::Index b = 0; b < B; ++b) {
        if (m[b] == 0.0) {
          dh_skip.col(b) = dh.col(b);
          dc_skip.col(b) = dc.col(b);
          dh_new.col(b).setZero();
          dc_new.col(b).setZero();
        }
      }
    }

    const Matrix& i = trace.in_gate[t];
    const Matrix& f = trace.forget_gate[t];
    const Matrix& g = trace.cell_gate[t];
    const Matrix& o = trace.out_gate[t];
    const Matrix& tc = trace.tanh_cell[t];

    dc_new.array() += dh_new.array() * o.array() * (1.0 - tc.array().square());
    auto c_prev = [&]() -> Matrix {
      return t > 0 ? trace.cell[t - 1] : Matrix::Zero(H, B);
    };
    da.middleRows(0, H) = (dc_new.array() * g.array() * i.array() * (1.0 - i.array())).matrix();
    da.middleRows(H, H) =
        (dc_new.array() * c_prev().array() * f.array() * (1.0 - f.array())).matrix();
    da.middleRows(2 * H, H) = (dc_new.array() * i.array() * (1.0 - g.array().square())).matrix();
    da.middleRows(3 * H, H) =
        (dh_new.array() * tc.array() * o.array() * (1.0 - o.array())).matrix();

    if (track_w) grads[layer.weight].noalias() += da * trace.xh[t].transpose();
    if (track_b) grads[layer.bias].col(0) += da.rowwise().sum();

    Matrix dxh = W.transpose() * da;
    if (want_inputs) grad_inputs[t] = dxh.topRows(layer.input);
    dh = dxh.bottomRows(H);
    dc = dc_new.cwiseProduct(f);
    if (masked) {
      dh += dh_skip;
      dc += dc_skip;
    }
  }
  return grad_inputs;
}

void lstm_step(const ModelParams& params, const Lstm& layer, const Vector& x,
               Vector& h, Vector& c) {
  const int H = layer.hidden;
  Vector xh(layer.input + H);
  xh << x, h;
  Vector a = params.value(layer.weight) * xh + params.value(layer.bias).col(0);
  auto sig = [](auto v) { return (1.0 + (-v.array()).exp()).inverse().matrix(); };
  const Vector i = sig(a.segment(0, H));
  const Vector f = sig(a.segment(H, H));
  const Vector g = a.segment(2 * H, H).array().tanh().matrix();
  const Vector o = sig(a.segment(3 * H, H));
  c = f.cwiseProduct(c) + i.cwiseProduct(g);
  h = o.cwiseProduct(c.array().tanh().matrix());
}

}  // namespace graphtune::nn
