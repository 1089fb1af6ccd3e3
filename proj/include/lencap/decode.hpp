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

#include <vector>

#include "lencap/model.hpp"

namespace lencap {

enum class DecodeMode {
  free_run,         // base models: unconstrained
  fixlen,           // mask eos before T, force eos at T (any variant)
  lenemb,           // condition each step on the remaining length
  marker,           // force <len_T> as the first emitted token
  marker_free,      // first step restricted to marker tokens; model picks
  lenemb_pipeline,  // T = argmax of the length head, then lenemb
};

struct DecodeOpts {
  int beam_size = 5;
  int max_steps = 0;  // 0 = max_length + 1 (+1 more in marker modes)
  DecodeMode mode = DecodeMode::free_run;
  int desired_length = 0;      // T for fixlen / lenemb / marker
  bool hard_constrain = false;  // additionally apply the fixlen mask in lenemb/marker modes
};

struct Hypothesis {
  std::vector<int> tokens;  // emitted ids; includes the marker and terminal eos
  double logprob = 0.0;
  LstmState state;
  bool finished = false;  // last token is eos
};

struct DecodeResult {
  std::vector<int> caption;  // content token ids only
  double logprob = 0.0;
  int chosen_length = 0;  // 0 when no length was selected
  bool finished = false;
};

// Before step T every eos is banned; at step T everything but eos is.
// t counts content tokens already emitted.
void fixlen_constrain(Tensor1& logits, int t, int desired_length);

// Standard beam search over renormalized masked log-probabilities. Finished
// hypotheses move to a pool and the beam refills; stops once the pool holds
// beam_size entries or max_steps is hit. Returns the pool sorted by logprob
// (live hypotheses are returned only when nothing finished).
std::vector<Hypothesis> beam_search(const CaptionModel& model, const Tensor1& features,
                                    const DecodeOpts& opts);

// beam_size=1 specialization, implemented independently.
Hypothesis greedy(const CaptionModel& model, const Tensor1& features, const DecodeOpts& opts);

std::vector<int> content_tokens(const std::vector<int>& raw, const CaptionModel& model);

DecodeResult generate_with_length(const CaptionModel& model, const Tensor1& features,
                                  int desired_length, DecodeOpts opts);

// lenemb: argmax of the length head, then conditioned generation.
// marker: the beam picks the marker; the chosen length is read back from it.
DecodeResult generate_with_predicted_length(const CaptionModel& model, const Tensor1& features,
                                            DecodeOpts opts);

}  // namespace lencap
