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

#include <optional>
#include <string>
#include <vector>

#include "lencap/layers.hpp"
#include "lencap/param_store.hpp"
#include "lencap/vocab.hpp"

namespace lencap {

enum class Variant { base, lenemb, marker };

std::string variant_name(Variant v);
Variant variant_from_name(const std::string& name);  // throws on unknown

struct ModelConfig {
  Variant variant = Variant::base;
  int vocab_size = 0;   // includes reserved tokens (and markers for marker models)
  int embed_dim = 64;   // word / length embedding width
  int hidden_dim = 128;
  int feature_dim = 32;
  int max_length = 30;  // content tokens per caption, excluding eos

  void validate() const;  // throws std::invalid_argument
};

// One training item: image features plus one reference caption as content
// token ids (no reserved or marker tokens inside).
struct TrainExample {
  Tensor1 features;
  std::vector<int> tokens;
};

// Remaining-length conditioning for one decoder step: the step at index t
// predicts token t of a caption meant to be desired_length tokens long.
struct LengthContext {
  int desired_length = 0;
  int t = 0;
};

// Target sequence for marker training: [<len_T>, tokens..., eos].
std::vector<int> marker_wrap_target(const std::vector<int>& tokens, int t_ref, const Vocab& vocab,
                                    int max_length);

// Feature-conditioned LSTM captioner with three conditioning variants and a
// length-classification head over {1..max_length}.
class CaptionModel {
 public:
  explicit CaptionModel(const ModelConfig& config);  // zero parameters

  // Uniform [-0.08, 0.08] init with the forget-gate bias shifted by +1.
  static CaptionModel init(const ModelConfig& config, uint64_t seed);

  const ModelConfig& config() const { return config_; }
  ParamStore& params() { return params_; }
  const ParamStore& params() const { return params_; }

  // id layout helpers (markers occupy the trailing id block)
  int first_marker_id() const { return config_.vocab_size - config_.max_length; }
  bool is_marker_token(int id) const {
    return config_.variant == Variant::marker && id >= first_marker_id() && id < config_.vocab_size;
  }
  int marker_token(int length) const;
  int marker_token_length(int id) const;

  LstmState encode_image(const Tensor1& features) const;

  // E_w[prev_token] + E_l[clamp(T - t, 0, max_length)] (lenemb models only).
  Tensor1 embed_input_lenemb(int prev_token, int desired_length, int t) const;

  struct StepResult {
    Tensor1 logits;
    LstmState state;
  };
  // One decoder step. lenemb models require a length context; base/marker
  // models reject one.
  StepResult step(int prev_token, const LstmState& state,
                  const std::optional<LengthContext>& len_ctx, LstmCache* cache = nullptr) const;

  // Probability over caption lengths {1..max_length}; index k = length k+1.
  Tensor1 predict_length(const Tensor1& features) const;

  // Mean cross-entropy per step of the teacher-forced caption (forward only).
  double teacher_forced_loss(const TrainExample& example) const;

  // Cross-entropy of the length head against the reference length.
  double length_loss(const TrainExample& example) const;

  // Forward + backward. Gradients are scaled by loss_scale and accumulated
  // into grads (a store with this model's shapes). Returns the unscaled loss.
  double caption_loss_backward(const TrainExample& example, ParamStore& grads,
                               double loss_scale) const;
  double length_loss_backward(const TrainExample& example, ParamStore& grads,
                              double loss_scale) const;

  // Teacher-forcing input/target ids for one example (variant-dependent).
  void build_io(const TrainExample& example, std::vector<int>& inputs, std::vector<int>& targets) const;

 private:
  void validate_example(const TrainExample& example) const;
  Tensor1 input_embedding(int prev_token, const std::optional<LengthContext>& len_ctx) const;

  ModelConfig config_;
  ParamStore params_;
};

}  // namespace lencap
