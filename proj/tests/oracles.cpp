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

#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

#include "lencap/vocab.hpp"

namespace oracles {

std::vector<double> naive_linear(const std::vector<std::vector<double>>& w,
                                 const std::vector<double>& b, const std::vector<double>& x) {
  std::vector<double> y(w.size(), 0.0);
  for (size_t r = 0; r < w.size(); ++r) {
    double s = 0.0;
    for (size_t c = 0; c < x.size(); ++c) s += w[r][c] * x[c];
    y[r] = s + b[r];
  }
  return y;
}

namespace {
double sig(double x) { return 1.0 / (1.0 + std::exp(-x)); }
}  // namespace

LstmOut scalar_lstm(const std::vector<std::vector<double>>& w_ih,
                    const std::vector<std::vector<double>>& w_hh, const std::vector<double>& b,
                    const std::vector<double>& x, const std::vector<double>& h_prev,
                    const std::vector<double>& c_prev) {
  const size_t d_h = h_prev.size();
  LstmOut out;
  out.h.resize(d_h);
  out.c.resize(d_h);
  for (size_t k = 0; k < d_h; ++k) {
    auto pre = [&](size_t row) {
      double s = b[row];
      for (size_t c = 0; c < x.size(); ++c) s += w_ih[row][c] * x[c];
      for (size_t c = 0; c < d_h; ++c) s += w_hh[row][c] * h_prev[c];
      return s;
    };
    const double gi = sig(pre(k));
    const double gf = sig(pre(d_h + k));
    const double gg = std::tanh(pre(2 * d_h + k));
    const double go = sig(pre(3 * d_h + k));
    out.c[k] = gf * c_prev[k] + gi * gg;
    out.h[k] = go * std::tanh(out.c[k]);
  }
  return out;
}

double scalar_adam_step(double value, double grad, double& m, double& v, int step, double lr,
                        double beta1, double beta2, double eps) {
  m = beta1 * m + (1.0 - beta1) * grad;
  v = beta2 * v + (1.0 - beta2) * grad * grad;
  const double m_hat = m / (1.0 - std::pow(beta1, step));
  const double v_hat = v / (1.0 - std::pow(beta2, step));
  return value - lr * m_hat / (std::sqrt(v_hat) + eps);
}

namespace {

using Gram = std::vector<int>;
using GramCount = std::map<Gram, int>;

GramCount grams_of(const Seq& seq, int n) {
  GramCount out;
  for (int s = 0; s + n <= static_cast<int>(seq.size()); ++s)
    out[Gram(seq.begin() + s, seq.begin() + s + n)] += 1;
  return out;
}

std::map<Gram, double> brute_idf(const std::vector<Refs>& refs) {
  const double log_n = std::log(static_cast<double>(refs.size()));
  std::map<Gram, int> df;
  for (const Refs& image : refs) {
    std::set<Gram> seen;
    for (const Seq& ref : image)
      for (int n = 1; n <= 4; ++n)
        for (const auto& [g, c] : grams_of(ref, n)) seen.insert(g);
    for (const Gram& g : seen) df[g] += 1;
  }
  std::map<Gram, double> idf;
  for (const auto& [g, d] : df) idf[g] = log_n - std::log(static_cast<double>(std::max(d, 1)));
  return idf;
}

double idf_of(const std::map<Gram, double>& idf, const Gram& g, double log_n) {
  auto it = idf.find(g);
  return it == idf.end() ? log_n : it->second;
}

double norm_of(const GramCount& counts, const std::map<Gram, double>& idf, double log_n) {
  double sq = 0.0;
  for (const auto& [g, c] : counts) {
    const double w = c * idf_of(idf, g, log_n);
    sq += w * w;
  }
  return std::sqrt(sq);
}

double clipped_sim(const GramCount& cand, const GramCount& ref, const std::map<Gram, double>& idf,
                   double log_n) {
  const double nc = norm_of(cand, idf, log_n);
  const double nr = norm_of(ref, idf, log_n);
  if (nc == 0.0 || nr == 0.0) return 0.0;
  double num = 0.0;
  for (const auto& [g, c] : cand) {
    auto it = ref.find(g);
    if (it == ref.end()) continue;
    const double w = idf_of(idf, g, log_n);
    num += static_cast<double>(std::min(c, it->second)) * it->second * w * w;
  }
  return num / (nc * nr);
}

}  // namespace

double brute_cider_d(const std::vector<Seq>& cands, const std::vector<Refs>& refs, double sigma) {
  const auto idf = brute_idf(refs);
  const double log_n = std::log(static_cast<double>(refs.size()));
  double total = 0.0;
  for (size_t i = 0; i < cands.size(); ++i) {
    double image = 0.0;
    for (const Seq& ref : refs[i]) {
      double mean_n = 0.0;
      for (int n = 1; n <= 4; ++n)
        mean_n += clipped_sim(grams_of(cands[i], n), grams_of(ref, n), idf, log_n);
      mean_n /= 4.0;
      const double delta = static_cast<double>(cands[i].size()) - static_cast<double>(ref.size());
      image += mean_n * std::exp(-delta * delta / (2.0 * sigma * sigma));
    }
    total += 10.0 * image / static_cast<double>(refs[i].size());
  }
  return 10.0 * total / static_cast<double>(cands.size());
}

double brute_mcider(const std::vector<Seq>& cands, const std::vector<Refs>& refs) {
  const auto idf = brute_idf(refs);
  const double log_n = std::log(static_cast<double>(refs.size()));
  double total = 0.0;
  for (size_t i = 0; i < cands.size(); ++i) {
    double mean_n = 0.0;
    for (int n = 1; n <= 4; ++n) {
      GramCount pooled;
      for (const Seq& ref : refs[i])
        for (const auto& [g, c] : grams_of(ref, n)) pooled[g] += c;
      mean_n += clipped_sim(grams_of(cands[i], n), pooled, idf, log_n);
    }
    total += 10.0 * mean_n / 4.0;
  }
  return 10.0 * total / static_cast<double>(cands.size());
}

namespace {

double masked_logprob(const lencap::Tensor1& logits, const std::vector<int>& support, int token) {
  double mx = -1e300;
  for (int tok : support) mx = std::max(mx, logits[tok]);
  double z = 0.0;
  for (int tok : support) z += std::exp(logits[tok] - mx);
  return logits[token] - mx - std::log(z);
}

void enumerate_rec(const lencap::CaptionModel& model, const std::vector<int>& support, int max_steps,
                   std::vector<int>& prefix, double logprob, int prev, const lencap::LstmState& state,
                   EnumBest& best) {
  if (static_cast<int>(prefix.size()) >= max_steps) return;
  const auto out = model.step(prev, state, std::nullopt);
  for (int tok : support) {
    const double lp = logprob + masked_logprob(out.logits, support, tok);
    prefix.push_back(tok);
    if (tok == lencap::Vocab::eos_id) {
      if (lp > best.logprob) best = EnumBest{prefix, lp};
    } else {
      enumerate_rec(model, support, max_steps, prefix, lp, tok, out.state, best);
    }
    prefix.pop_back();
  }
}

}  // namespace

EnumBest enumerate_best(const lencap::CaptionModel& model, const lencap::Tensor1& features,
                        const std::vector<int>& support, int max_steps) {
  EnumBest best{{}, -1e300};
  std::vector<int> prefix;
  enumerate_rec(model, support, max_steps, prefix, 0.0, lencap::Vocab::bos_id,
                model.encode_image(features), best);
  if (best.tokens.empty()) throw std::runtime_error("enumerate_best: nothing terminated");
  return best;
}

}  // namespace oracles
