/* Copyright 2026 The lencap Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License. */

#pragma once

#include "lencap/tensor.hpp"

namespace lencap {

struct LstmState {
  Tensor1 h;
  Tensor1 c;
};

// Everything the backward pass needs for one LSTM step.
struct LstmCache {
  Tensor1 x, h_prev, c_prev;
  Tensor1 i, f, g, o;
  Tensor1 c_new, tanh_c_new;
};

// y = W x + b. Throws on shape mismatch.
Tensor1 linear(const Tensor2& w, const Tensor1& b, const Tensor1& x);

// Accumulates dW += dy xᵀ, db += dy; writes dx = Wᵀ dy when dx is non-null.
void linear_backward(const Tensor2& w, const Tensor1& x, const Tensor1& dy,
                     Tensor2& dw, Tensor1& db, Tensor1* dx);

// Four-gate LSTM cell. Gate pre-activations are packed [i, f, g, o] in the
// rows of w_ih (4*d_h x d_x), w_hh (4*d_h x d_h) and b (4*d_h).
// c' = f.c + i.g,  h' = o.tanh(c').
LstmState lstm_step(const Tensor2& w_ih, const Tensor2& w_hh, const Tensor1& b,
                    const Tensor1& x, const LstmState& state, LstmCache* cache = nullptr);

// Given upstream dh/dc for the step's outputs, accumulates parameter
// gradients and writes the gradients w.r.t. x, h_prev and c_prev.
void lstm_step_backward(const Tensor2& w_ih, const Tensor2& w_hh, const LstmCache& cache,
                        const Tensor1& dh, const Tensor1& dc,
                        Tensor2& dw_ih, Tensor2& dw_hh, Tensor1& db,
                        Tensor1& dx, Tensor1& dh_prev, Tensor1& dc_prev);

Tensor1 softmax(const Tensor1& logits);

// Log-softmax with max-subtraction; -inf entries stay -inf (masked support).
Tensor1 log_softmax(const Tensor1& logits);

struct XentResult {
  double loss;
  Tensor1 dlogits;  // softmax(logits) - onehot(target)
};

// Cross-entropy of softmax(logits) against a single target class.
XentResult softmax_xent(const Tensor1& logits, int target);

}  // namespace lencap
