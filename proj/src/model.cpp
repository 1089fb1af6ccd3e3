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

#include "lencap/model.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace lencap {

std::string variant_name(Variant v) {
  switch (v) {
    case Variant::base: return "base";
    case Variant::lenemb: return "lenemb";
    case Variant::marker: return "marker";
  }
  throw std::logic_error("variant_name: bad enum");
}

Variant variant_from_name(const std::string& name) {
  if (name == "base") return Variant::base;
  if (name == "lenemb") return Variant::lenemb;
  if (name == "marker") return Variant::marker;
  throw std::invalid_argument("unknown model variant '" + name + "'");
}

void ModelConfig::validate() const {
  if (embed_dim <= 0 || hidden_dim <= 0 || feature_dim <= 0)
    throw std::invalid_argument("ModelConfig: dimensions must be positive");
  if (max_length < 1) throw std::invalid_argument("ModelConfig: max_length must be >= 1");
  const int min_vocab = 4 + 1 + (variant == Variant::marker ? max_length : 0);
  if (vocab_size < min_vocab) throw std::invalid_argument("ModelConfig: vocab_size too small");
}

std::vector<int> marker_wrap_target(const std::vector<int>& tokens, int t_ref, const Vocab& vocab,
                                    int max_length) {
  if (tokens.empty()) throw std::invalid_argument("marker_wrap_target: empty token sequence");
  if (static_cast<int>(tokens.size()) != t_ref)
    throw std::invalid_argument("marker_wrap_target: t_ref does not match token count");
  if (t_ref > max_length) throw std::invalid_argument("marker_wrap_target: t_ref exceeds max_length");
  if (vocab.marker_count() < max_length)
    throw std::invalid_argument("marker_wrap_target: vocabulary has no marker tokens");
  std::vector<int> out;
  out.reserve(tokens.size() + 2);
  out.push_back(vocab.marker_id(t_ref));
  out.insert(out.end(), tokens.begin(), tokens.end());
  out.push_back(Vocab::eos_id);
  return out;
}

CaptionModel::CaptionModel(const ModelConfig& config) : config_(config) {
  config_.validate();
  const int v = config_.vocab_size;
  const int d = config_.embed_dim;
  const int d_h = config_.hidden_dim;
  const int d_f = config_.feature_dim;
  const int l_max = config_.max_length;

  params_.add_mat("E_w", v, d);
  if (config_.variant == Variant::lenemb) params_.add_mat("E_l", l_max + 1, d);
  params_.add_mat("W_h0", d_h, d_f);
  params_.add_vec("b_h0", d_h);
  params_.add_mat("W_c0", d_h, d_f);
  params_.add_vec("b_c0", d_h);
  params_.add_mat("W_ih", 4 * d_h, d);
  params_.add_mat("W_hh", 4 * d_h, d_h);
  params_.add_vec("b_lstm", 4 * d_h);
  params_.add_mat("W_out", v, d_h);
  params_.add_vec("b_out", v);
  params_.add_mat("W_l1", d_h, d_f);
  params_.add_vec("b_l1", d_h);
  params_.add_mat("W_l2", l_max, d_h);
  params_.add_vec("b_l2", l_max);
}

CaptionModel CaptionModel::init(const ModelConfig& config, uint64_t seed) {
  CaptionModel model(config);
  Rng rng(Rng::mix(seed, 0x696e6974ULL));
  model.params_.init_uniform(-0.08, 0.08, rng);
  // Forget gate starts open so early gradients reach across long captions.
  Tensor1& b = model.params_.vec("b_lstm");
  const int d_h = config.hidden_dim;
  for (int k = 0; k < d_h; ++k) b[d_h + k] += 1.0;
  return model;
}

int CaptionModel::marker_token(int length) const {
  if (config_.variant != Variant::marker)
    throw std::invalid_argument("marker_token: not a marker model");
  if (length < 1 || length > config_.max_length)
    throw std::out_of_range("marker_token: length out of range");
  return first_marker_id() + (length - 1);
}

int CaptionModel::marker_token_length(int id) const {
  if (!is_marker_token(id)) throw std::out_of_range("marker_token_length: not a marker id");
  return id - first_marker_id() + 1;
}

LstmState CaptionModel::encode_image(const Tensor1& features) const {
  if (features.size() != config_.feature_dim)
    throw std::invalid_argument("encode_image: feature dimension mismatch");
  LstmState state;
  state.h = linear(params_.mat("W_h0"), params_.vec("b_h0"), features);
  state.c = linear(params_.mat("W_c0"), params_.vec("b_c0"), features);
  for (int k = 0; k < state.h.size(); ++k) {
    state.h[k] = std::tanh(state.h[k]);
    state.c[k] = std::tanh(state.c[k]);
  }
  return state;
}

Tensor1 CaptionModel::embed_input_lenemb(int prev_token, int desired_length, int t) const {
  if (config_.variant != Variant::lenemb)
    throw std::invalid_argument("embed_input_lenemb: not a lenemb model");
  if (prev_token < 0 || prev_token >= config_.vocab_size)
    throw std::out_of_range("embed_input_lenemb: token id out of range");
  if (desired_length < 1 || desired_length > config_.max_length)
    throw std::out_of_range("embed_input_lenemb: desired length out of range");
  if (t < 0) throw std::out_of_range("embed_input_lenemb: negative step");
  const int remaining = std::clamp(desired_length - t, 0, config_.max_length);
  const Tensor2& e_w = params_.mat("E_w");
  const Tensor2& e_l = params_.mat("E_l");
  Tensor1 x(config_.embed_dim);
  const double* wrow = e_w.row(prev_token);
  const double* lrow = e_l.row(remaining);
  for (int k = 0; k < config_.embed_dim; ++k) x[k] = wrow[k] + lrow[k];
  return x;
}

Tensor1 CaptionModel::input_embedding(int prev_token,
                                      const std::optional<LengthContext>& len_ctx) const {
  if (config_.variant == Variant::lenemb) {
    if (!len_ctx) throw std::invalid_argument("step: lenemb model requires a length context");
    return embed_input_lenemb(prev_token, len_ctx->desired_length, len_ctx->t);
  }
  if (len_ctx) throw std::invalid_argument("step: length context only applies to lenemb models");
  if (prev_token < 0 || prev_token >= config_.vocab_size)
    throw std::out_of_range("step: token id out of range");
  const Tensor2& e_w = params_.mat("E_w");
  Tensor1 x(config_.embed_dim);
  const double* row = e_w.row(prev_token);
  std::copy(row, row + config_.embed_dim, x.data());
  return x;
}

CaptionModel::StepResult CaptionModel::step(int prev_token, const LstmState& state,
                                            const std::optional<LengthContext>& len_ctx,
                                            LstmCache* cache) const {
  StepResult res;
  const Tensor1 x = input_embedding(prev_token, len_ctx);
  res.state = lstm_step(params_.mat("W_ih"), params_.mat("W_hh"), params_.vec("b_lstm"), x, state, cache);
  res.logits = linear(params_.mat("W_out"), params_.vec("b_out"), res.state.h);
  return res;
}

Tensor1 CaptionModel::predict_length(const Tensor1& features) const {
  if (features.size() != config_.feature_dim)
    throw std::invalid_argument("predict_length: feature dimension mismatch");
  Tensor1 hidden = linear(params_.mat("W_l1"), params_.vec("b_l1"), features);
  for (int k = 0; k < hidden.size(); ++k) hidden[k] = std::tanh(hidden[k]);
  return softmax(linear(params_.mat("W_l2"), params_.vec("b_l2"), hidden));
}

void CaptionModel::validate_example(const TrainExample& example) const {
  if (example.features.size() != config_.feature_dim)
    throw std::invalid_argument("TrainExample: feature dimension mismatch");
  const int t_ref = static_cast<int>(example.tokens.size());
  if (t_ref < 1 || t_ref > config_.max_length)
    throw std::invalid_argument("TrainExample: caption length out of [1, max_length]");
  const int content_end = config_.variant == Variant::marker ? first_marker_id() : config_.vocab_size;
  for (int tok : example.tokens) {
    if (tok <= Vocab::unk_id || tok >= content_end)
      throw std::invalid_argument("TrainExample: reserved or marker token inside caption");
  }
}

void CaptionModel::build_io(const TrainExample& example, std::vector<int>& inputs,
                            std::vector<int>& targets) const {
  validate_example(example);
  const int t_ref = static_cast<int>(example.tokens.size());
  inputs.clear();
  targets.clear();
  inputs.push_back(Vocab::bos_id);
  if (config_.variant == Variant::marker) {
    const int marker = marker_token(t_ref);
    inputs.push_back(marker);
    targets.push_back(marker);
  }
  inputs.insert(inputs.end(), example.tokens.begin(), example.tokens.end());
  targets.insert(targets.end(), example.tokens.begin(), example.tokens.end());
  targets.push_back(Vocab::eos_id);
}

double CaptionModel::teacher_forced_loss(const TrainExample& example) const {
  std::vector<int> inputs, targets;
  build_io(example, inputs, targets);
  const int t_ref = static_cast<int>(example.tokens.size());
  const int steps = static_cast<int>(inputs.size());

  LstmState state = encode_image(example.features);
  double total = 0.0;
  for (int s = 0; s < steps; ++s) {
    std::optional<LengthContext> ctx;
    if (config_.variant == Variant::lenemb) ctx = LengthContext{t_ref, s};
    StepResult out = step(inputs[static_cast<size_t>(s)], state, ctx);
    total += softmax_xent(out.logits, targets[static_cast<size_t>(s)]).loss;
    state = std::move(out.state);
  }
  return total / steps;
}

double CaptionModel::length_loss(const TrainExample& example) const {
  validate_example(example);
  Tensor1 hidden = linear(params_.mat("W_l1"), params_.vec("b_l1"), example.features);
  for (int k = 0; k < hidden.size(); ++k) hidden[k] = std::tanh(hidden[k]);
  const Tensor1 logits = linear(params_.mat("W_l2"), params_.vec("b_l2"), hidden);
  return softmax_xent(logits, static_cast<int>(example.tokens.size()) - 1).loss;
}

double CaptionModel::caption_loss_backward(const TrainExample& example, ParamStore& grads,
                                           double loss_scale) const {
  std::vector<int> inputs, targets;
  build_io(example, inputs, targets);
  const int t_ref = static_cast<int>(example.tokens.size());
  const int steps = static_cast<int>(inputs.size());
  const int d_h = config_.hidden_dim;

  const Tensor2& w_ih = params_.mat("W_ih");
  const Tensor2& w_hh = params_.mat("W_hh");
  const Tensor1& b_lstm = params_.vec("b_lstm");
  const Tensor2& w_out = params_.mat("W_out");
  const Tensor1& b_out = params_.vec("b_out");

  // forward with caches
  LstmState state = encode_image(example.features);
  const Tensor1 h0 = state.h;
  const Tensor1 c0 = state.c;
  std::vector<LstmCache> caches(static_cast<size_t>(steps));
  std::vector<Tensor1> hs(static_cast<size_t>(steps));
  std::vector<Tensor1> dlogits(static_cast<size_t>(steps));
  double total = 0.0;
  for (int s = 0; s < steps; ++s) {
    std::optional<LengthContext> ctx;
    if (config_.variant == Variant::lenemb) ctx = LengthContext{t_ref, s};
    const Tensor1 x = input_embedding(inputs[static_cast<size_t>(s)], ctx);
    state = lstm_step(w_ih, w_hh, b_lstm, x, state, &caches[static_cast<size_t>(s)]);
    hs[static_cast<size_t>(s)] = state.h;
    const Tensor1 logits = linear(w_out, b_out, state.h);
    XentResult xent = softmax_xent(logits, targets[static_cast<size_t>(s)]);
    total += xent.loss;
    dlogits[static_cast<size_t>(s)] = std::move(xent.dlogits);
  }

  // backward through time
  Tensor2& g_e_w = grads.mat_grad("E_w");
  Tensor2& g_w_ih = grads.mat_grad("W_ih");
  Tensor2& g_w_hh = grads.mat_grad("W_hh");
  Tensor1& g_b_lstm = grads.vec_grad("b_lstm");
  Tensor2& g_w_out = grads.mat_grad("W_out");
  Tensor1& g_b_out = grads.vec_grad("b_out");

  const double scale = loss_scale / steps;
  Tensor1 carry_dh(d_h), carry_dc(d_h);
  Tensor1 dh_from_logits(d_h);
  for (int s = steps - 1; s >= 0; --s) {
    Tensor1& dl = dlogits[static_cast<size_t>(s)];
    for (int k = 0; k < dl.size(); ++k) dl[k] *= scale;
    linear_backward(w_out, hs[static_cast<size_t>(s)], dl, g_w_out, g_b_out, &dh_from_logits);
    for (int k = 0; k < d_h; ++k) carry_dh[k] += dh_from_logits[k];

    Tensor1 dx, dh_prev, dc_prev;
    lstm_step_backward(w_ih, w_hh, caches[static_cast<size_t>(s)], carry_dh, carry_dc, g_w_ih, g_w_hh,
                       g_b_lstm, dx, dh_prev, dc_prev);
    carry_dh = std::move(dh_prev);
    carry_dc = std::move(dc_prev);

    double* wrow = g_e_w.row(inputs[static_cast<size_t>(s)]);
    for (int k = 0; k < dx.size(); ++k) wrow[k] += dx[k];
    if (config_.variant == Variant::lenemb) {
      const int remaining = std::clamp(t_ref - s, 0, config_.max_length);
      double* lrow = grads.mat_grad("E_l").row(remaining);
      for (int k = 0; k < dx.size(); ++k) lrow[k] += dx[k];
    }
  }

  // through the feature-to-state maps
  Tensor1 da(d_h);
  for (int k = 0; k < d_h; ++k) da[k] = carry_dh[k] * (1.0 - h0[k] * h0[k]);
  linear_backward(params_.mat("W_h0"), example.features, da, grads.mat_grad("W_h0"),
                  grads.vec_grad("b_h0"), nullptr);
  for (int k = 0; k < d_h; ++k) da[k] = carry_dc[k] * (1.0 - c0[k] * c0[k]);
  linear_backward(params_.mat("W_c0"), example.features, da, grads.mat_grad("W_c0"),
                  grads.vec_grad("b_c0"), nullptr);

  return total / steps;
}

double CaptionModel::length_loss_backward(const TrainExample& example, ParamStore& grads,
                                          double loss_scale) const {
  validate_example(example);
  const Tensor2& w_l1 = params_.mat("W_l1");
  const Tensor2& w_l2 = params_.mat("W_l2");
  Tensor1 hidden = linear(w_l1, params_.vec("b_l1"), example.features);
  for (int k = 0; k < hidden.size(); ++k) hidden[k] = std::tanh(hidden[k]);
  const Tensor1 logits = linear(w_l2, params_.vec("b_l2"), hidden);
  XentResult xent = softmax_xent(logits, static_cast<int>(example.tokens.size()) - 1);

  for (int k = 0; k < xent.dlogits.size(); ++k) xent.dlogits[k] *= loss_scale;
  Tensor1 dhidden(hidden.size());
  linear_backward(w_l2, hidden, xent.dlogits, grads.mat_grad("W_l2"), grads.vec_grad("b_l2"), &dhidden);
  for (int k = 0; k < dhidden.size(); ++k) dhidden[k] *= 1.0 - hidden[k] * hidden[k];
  linear_backward(w_l1, example.features, dhidden, grads.mat_grad("W_l1"), grads.vec_grad("b_l1"),
                  nullptr);
  return xent.loss;
}

}  // namespace lencap
