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

// Independent reference implementations used only by tests. Everything here
// is written from the metric/layer definitions directly, without touching
// the library's code paths, so the two sides can be compared.

#pragma once

#include <map>
#include <vector>

#include "lencap/decode.hpp"
#include "lencap/model.hpp"
#include "lencap/tensor.hpp"

namespace oracles {

// y = W x + b via explicit double loops.
std::vector<double> naive_linear(const std::vector<std::vector<double>>& w,
                                 const std::vector<double>& b, const std::vector<double>& x);

// Scalar-by-scalar four-gate LSTM evaluation.
struct LstmOut {
  std::vector<double> h, c;
};
LstmOut scalar_lstm(const std::vector<std::vector<double>>& w_ih,
                    const std::vector<std::vector<double>>& w_hh, const std::vector<double>& b,
                    const std::vector<double>& x, const std::vector<double>& h_prev,
                    const std::vector<double>& c_prev);

// One Adam update on a single coordinate, with bias correction.
double scalar_adam_step(double value, double grad, double& m, double& v, int step, double lr,
                        double beta1, double beta2, double eps);

// Brute-force consensus metrics over explicit n-gram maps.
using Seq = std::vector<int>;
using Refs = std::vector<Seq>;
double brute_cider_d(const std::vector<Seq>& cands, const std::vector<Refs>& refs, double sigma = 6.0);
double brute_mcider(const std::vector<Seq>& cands, const std::vector<Refs>& refs);

// Exhaustively enumerates eos-terminated sequences of at most max_steps
// tokens over the given support and returns the best total renormalized
// log-probability (support must exclude bos/pad; eos included).
struct EnumBest {
  std::vector<int> tokens;
  double logprob;
};
EnumBest enumerate_best(const lencap::CaptionModel& model, const lencap::Tensor1& features,
                        const std::vector<int>& support, int max_steps);

}  // namespace oracles
