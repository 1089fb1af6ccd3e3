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

#include "lencap/layers.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace lencap {

namespace {

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

inline double dot(const double* a, const double* b, int n) {
  double s = 0.0;
  for (int k = 0; k < n; ++k) s += a[k] * b[k];
  return s;
}

// acc += alpha * b
inline void axpy(double* acc, double alpha, const double* b, int n) {
  for (int k = 0; k < n; ++k) acc[k] += alpha * b[k];
}

}  // namespace

Tensor1 linear(const Tensor2& w, const Tensor1& b, const Tensor1& x) {
  if (w.cols != x.size() || w.rows != b.size())
    throw std::invalid_argument("linear: shape mismatch");
  Tensor1 y(w.rows);
  for (int r = 0; r < w.rows; ++r) y[r] = dot(w.row(r), x.data(), w.cols) + b[r];
  return y;
}

void linear_backward(const Tensor2& w, const Tensor1& x, const Tensor1& dy,
                     Tensor2& dw, Tensor1& db, Tensor1* dx) {
  if (w.cols != x.size() || dy.size() != w.rows)
    throw std::invalid_argument("linear_backward: shape mismatch");
  if (dw.rows != w.rows || dw.cols != w.cols || db.size() != w.rows)
    throw std::invalid_argument("linear_backward: gradient shape mismatch");
  if (dx) {
    if (dx->size() != w.cols) throw std::invalid_argument("linear_backward: dx shape mismatch");
    dx->fill(0.0);
  }
  for (int r = 0; r < w.rows; ++r) {
    const double dy_r = dy[r];
    db[r] += dy_r;
    if (dy_r != 0.0) {
      axpy(dw.row(r), dy_r, x.data(), w.cols);
      if (dx) axpy(dx->data(), dy_r, w.row(r), w.cols);
    }
  }
}

LstmState lstm_step(const Tensor2& w_ih, const Tensor2& w_hh, const Tensor1& b,
                    const Tensor1& x, const LstmState& state, LstmCache* cache) {
  const int d_h = state.h.size();
  if (state.c.size() != d_h) throw std::invalid_argument("lstm_step: h/c length mismatch");
  if (w_ih.rows != 4 * d_h || w_hh.rows != 4 * d_h || b.size() != 4 * d_h)
    throw std::invalid_argument("lstm_step: gate shape mismatch");
  if (w_ih.cols != x.size() || w_hh.cols != d_h)
    throw std::invalid_argument("lstm_step: input shape mismatch");

  Tensor1 pre(4 * d_h);
  for (int r = 0; r < 4 * d_h; ++r)
    pre[r] = dot(w_ih.row(r), x.data(), w_ih.cols) + dot(w_hh.row(r), state.h.data(), d_h) + b[r];

  Tensor1 gi(d_h), gf(d_h), gg(d_h), go(d_h);
  for (int k = 0; k < d_h; ++k) {
    gi[k] = sigmoid(pre[k]);
    gf[k] = sigmoid(pre[d_h + k]);
    gg[k] = std::tanh(pre[2 * d_h + k]);
    go[k] = sigmoid(pre[3 * d_h + k]);
  }

  LstmState out;
  out.c = Tensor1(d_h);
  out.h = Tensor1(d_h);
  Tensor1 tanh_c(d_h);
  for (int k = 0; k < d_h; ++k) {
    out.c[k] = gf[k] * state.c[k] + gi[k] * gg[k];
    tanh_c[k] = std::tanh(out.c[k]);
    out.h[k] = go[k] * tanh_c[k];
  }

  if (cache) {
    cache->x = x;
    cache->h_prev = state.h;
    cache->c_prev = state.c;
    cache->i = std::move(gi);
    cache->f = std::move(gf);
    cache->g = std::move(gg);
    cache->o = std::move(go);
    cache->c_new = out.c;
    cache->tanh_c_new = std::move(tanh_c);
  }
  return out;
}

void lstm_step_backward(const Tensor2& w_ih, const Tensor2& w_hh, const LstmCache& cache,
                        const Tensor1& dh, const Tensor1& dc,
                        Tensor2& dw_ih, Tensor2& dw_hh, Tensor1& db,
                        Tensor1& dx, Tensor1& dh_prev, Tensor1& dc_prev) {
  const int d_h = cache.h_prev.size();
  const int d_x = cache.x.size();
  if (dh.size() != d_h || dc.size() != d_h)
    throw std::invalid_argument("lstm_step_backward: upstream shape mismatch");

  Tensor1 dpre(4 * d_h);
  dc_prev = Tensor1(d_h);
  for (int k = 0; k < d_h; ++k) {
    const double i = cache.i[k], f = cache.f[k], g = cache.g[k], o = cache.o[k];
    const double tc = cache.tanh_c_new[k];
    const double d_o = dh[k] * tc;
    const double dc_total = dc[k] + dh[k] * o * (1.0 - tc * tc);
    const double d_i = dc_total * g;
    const double d_f = dc_total * cache.c_prev[k];
    const double d_g = dc_total * i;
    dc_prev[k] = dc_total * f;
    dpre[k] = d_i * i * (1.0 - i);
    dpre[d_h + k] = d_f * f * (1.0 - f);
    dpre[2 * d_h + k] = d_g * (1.0 - g * g);
    dpre[3 * d_h + k] = d_o * o * (1.0 - o);
  }

  dx = Tensor1(d_x);
  dh_prev = Tensor1(d_h);
  for (int r = 0; r < 4 * d_h; ++r) {
    const double d = dpre[r];
    db[r] += d;
    if (d != 0.0) {
      axpy(dw_ih.row(r), d, cache.x.data(), d_x);
      axpy(dw_hh.row(r), d, cache.h_prev.data(), d_h);
      axpy(dx.data(), d, w_ih.row(r), d_x);
      axpy(dh_prev.data(), d, w_hh.row(r), d_h);
    }
  }
}

Tensor1 softmax(const Tensor1& logits) {
  Tensor1 p = log_softmax(logits);
  for (int k = 0; k < p.size(); ++k) p[k] = std::exp(p[k]);
  return p;
}

Tensor1 log_softmax(const Tensor1& logits) {
  const int n = logits.size();
  if (n == 0) throw std::invalid_argument("log_softmax: empty logits");
  double mx = -std::numeric_limits<double>::infinity();
  for (int k = 0; k < n; ++k) mx = std::max(mx, logits[k]);
  if (!(mx > -std::numeric_limits<double>::infinity()))
    throw std::invalid_argument("log_softmax: all entries masked");
  double z = 0.0;
  for (int k = 0; k < n; ++k) z += std::exp(logits[k] - mx);
  const double log_z = mx + std::log(z);
  Tensor1 out(n);
  for (int k = 0; k < n; ++k) out[k] = logits[k] - log_z;
  return out;
}

XentResult softmax_xent(const Tensor1& logits, int target) {
  if (target < 0 || target >= logits.size())
    throw std::out_of_range("softmax_xent: target out of range");
  Tensor1 logp = log_softmax(logits);
  XentResult res;
  res.loss = -logp[target];
  res.dlogits = Tensor1(logits.size());
  for (int k = 0; k < logits.size(); ++k) res.dlogits[k] = std::exp(logp[k]);
  res.dlogits[target] -= 1.0;
  return res;
}

}  // namespace lencap
