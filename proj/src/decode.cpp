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

#include "lencap/decode.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace lencap {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// Resolved per-decode settings.
struct Plan {
  int T = 0;                // desired length; 0 when none applies
  bool lenemb_ctx = false;  // feed the remaining-length embedding
  bool fixlen_mask = false;
  bool marker_step = false;  // step 0 emits a marker
  int forced_marker = -1;    // -1 = model chooses among all markers
  int max_steps = 0;
};

int require_length(const CaptionModel& model, int t) {
  if (t < 1 || t > model.config().max_length)
    throw std::out_of_range("decode: desired length out of [1, max_length]");
  return t;
}

void require_variant(const CaptionModel& model, Variant v, const char* what) {
  if (model.config().variant != v)
    throw std::invalid_argument(std::string("decode: ") + what + " requires a " + variant_name(v) +
                                " model");
}

int argmax_length(const CaptionModel& model, const Tensor1& features) {
  const Tensor1 probs = model.predict_length(features);
  int best = 0;
  for (int k = 1; k < probs.size(); ++k)
    if (probs[k] > probs[best]) best = k;
  return best + 1;
}

Plan make_plan(const CaptionModel& model, const Tensor1& features, const DecodeOpts& opts) {
  if (opts.beam_size < 1) throw std::invalid_argument("decode: beam_size must be >= 1");
  const Variant variant = model.config().variant;
  Plan plan;
  switch (opts.mode) {
    case DecodeMode::free_run:
      if (variant == Variant::lenemb)
        throw std::invalid_argument("decode: lenemb models need a desired or predicted length");
      if (variant == Variant::marker) plan.marker_step = true;
      break;
    case DecodeMode::fixlen:
      plan.T = require_length(model, opts.desired_length);
      plan.fixlen_mask = true;
      plan.lenemb_ctx = variant == Variant::lenemb;
      if (variant == Variant::marker) {
        plan.marker_step = true;
        plan.forced_marker = model.marker_token(plan.T);
      }
      break;
    case DecodeMode::lenemb:
      require_variant(model, Variant::lenemb, "lenemb mode");
      plan.T = require_length(model, opts.desired_length);
      plan.lenemb_ctx = true;
      plan.fixlen_mask = opts.hard_constrain;
      break;
    case DecodeMode::marker:
      require_variant(model, Variant::marker, "marker mode");
      plan.T = require_length(model, opts.desired_length);
      plan.marker_step = true;
      plan.forced_marker = model.marker_token(plan.T);
      plan.fixlen_mask = opts.hard_constrain;
      break;
    case DecodeMode::marker_free:
      require_variant(model, Variant::marker, "marker_free mode");
      plan.marker_step = true;
      break;
    case DecodeMode::lenemb_pipeline:
      require_variant(model, Variant::lenemb, "lenemb_pipeline mode");
      plan.T = argmax_length(model, features);
      plan.lenemb_ctx = true;
      plan.fixlen_mask = opts.hard_constrain;
      break;
  }
  plan.max_steps = opts.max_steps > 0
                       ? opts.max_steps
                       : model.config().max_length + 1 + (plan.marker_step ? 1 : 0);
  return plan;
}

void apply_masks(Tensor1& logits, const CaptionModel& model, const Plan& plan, int raw_step) {
  logits[Vocab::pad_id] = kNegInf;
  logits[Vocab::bos_id] = kNegInf;
  if (model.config().variant == Variant::marker) {
    const int first = model.first_marker_id();
    if (plan.marker_step && raw_step == 0) {
      if (plan.forced_marker >= 0) {
        for (int tok = 0; tok < logits.size(); ++tok)
          if (tok != plan.forced_marker) logits[tok] = kNegInf;
      } else {
        for (int tok = 0; tok < first; ++tok) logits[tok] = kNegInf;
      }
      return;
    }
    for (int tok = first; tok < logits.size(); ++tok) logits[tok] = kNegInf;
  }
  if (plan.fixlen_mask) {
    const int t = raw_step - (plan.marker_step ? 1 : 0);
    if (t >= 0) fixlen_constrain(logits, t, plan.T);
  }
}

std::optional<LengthContext> step_context(const Plan& plan, int raw_step) {
  if (!plan.lenemb_ctx) return std::nullopt;
  return LengthContext{plan.T, raw_step};
}

}  // namespace

void fixlen_constrain(Tensor1& logits, int t, int desired_length) {
  if (desired_length < 1) throw std::invalid_argument("fixlen_constrain: desired length must be >= 1");
  if (t < 0) throw std::invalid_argument("fixlen_constrain: negative step");
  if (t < desired_length) {
    logits[Vocab::eos_id] = kNegInf;
  } else {
    for (int tok = 0; tok < logits.size(); ++tok)
      if (tok != Vocab::eos_id) logits[tok] = kNegInf;
  }
}

std::vector<Hypothesis> beam_search(const CaptionModel& model, const Tensor1& features,
                                    const DecodeOpts& opts) {
  const Plan plan = make_plan(model, features, opts);
  const int vocab = model.config().vocab_size;

  std::vector<Hypothesis> live(1);
  live[0].state = model.encode_image(features);
  std::vector<Hypothesis> pool;

  struct Cand {
    double score;
    int tok;
    int parent;
  };

  for (int raw_step = 0;
       raw_step < plan.max_steps && !live.empty() && static_cast<int>(pool.size()) < opts.beam_size;
       ++raw_step) {
    std::vector<Cand> cands;
    std::vector<LstmState> next_states(live.size());
    for (size_t p = 0; p < live.size(); ++p) {
      const Hypothesis& hyp = live[p];
      const int prev = hyp.tokens.empty() ? Vocab::bos_id : hyp.tokens.back();
      CaptionModel::StepResult out = model.step(prev, hyp.state, step_context(plan, raw_step));
      next_states[p] = std::move(out.state);
      apply_masks(out.logits, model, plan, raw_step);
      const Tensor1 logp = log_softmax(out.logits);
      for (int tok = 0; tok < vocab; ++tok)
        if (std::isfinite(logp[tok])) cands.push_back({hyp.logprob + logp[tok], tok, static_cast<int>(p)});
    }
    std::sort(cands.begin(), cands.end(), [](const Cand& a, const Cand& b) {
      if (a.score != b.score) return a.score > b.score;
      if (a.tok != b.tok) return a.tok < b.tok;
      return a.parent < b.parent;
    });

    // Only eos expansions ranked inside the top beam_size finish; the live
    // beam refills from the remaining candidates in score order.
    std::vector<Hypothesis> new_live;
    for (size_t ci = 0; ci < cands.size(); ++ci) {
      const Cand& c = cands[ci];
      const bool in_top = ci < static_cast<size_t>(opts.beam_size);
      const bool is_eos = c.tok == Vocab::eos_id;
      const bool take_eos = is_eos && in_top && static_cast<int>(pool.size()) < opts.beam_size;
      const bool take_live = !is_eos && static_cast<int>(new_live.size()) < opts.beam_size;
      if (take_eos || take_live) {
        Hypothesis h;
        h.tokens = live[static_cast<size_t>(c.parent)].tokens;
        h.tokens.push_back(c.tok);
        h.logprob = c.score;
        h.state = next_states[static_cast<size_t>(c.parent)];
        h.finished = is_eos;
        (is_eos ? pool : new_live).push_back(std::move(h));
      }
      if (static_cast<int>(new_live.size()) >= opts.beam_size && !in_top) break;
    }
    live = std::move(new_live);
  }

  std::vector<Hypothesis> result = pool.empty() ? std::move(live) : std::move(pool);
  std::sort(result.begin(), result.end(), [](const Hypothesis& a, const Hypothesis& b) {
    if (a.logprob != b.logprob) return a.logprob > b.logprob;
    return a.tokens < b.tokens;
  });
  return result;
}

Hypothesis greedy(const CaptionModel& model, const Tensor1& features, const DecodeOpts& opts) {
  const Plan plan = make_plan(model, features, opts);
  Hypothesis hyp;
  hyp.state = model.encode_image(features);
  for (int raw_step = 0; raw_step < plan.max_steps; ++raw_step) {
    const int prev = hyp.tokens.empty() ? Vocab::bos_id : hyp.tokens.back();
    CaptionModel::StepResult out = model.step(prev, hyp.state, step_context(plan, raw_step));
    apply_masks(out.logits, model, plan, raw_step);
    const Tensor1 logp = log_softmax(out.logits);
    int best = -1;
    for (int tok = 0; tok < logp.size(); ++tok) {
      if (!std::isfinite(logp[tok])) continue;
      if (best < 0 || logp[tok] > logp[best]) best = tok;
    }
    if (best < 0) throw std::logic_error("greedy: every token masked");
    hyp.tokens.push_back(best);
    hyp.logprob += logp[best];
    hyp.state = std::move(out.state);
    if (best == Vocab::eos_id) {
      hyp.finished = true;
      break;
    }
  }
  return hyp;
}

std::vector<int> content_tokens(const std::vector<int>& raw, const CaptionModel& model) {
  std::vector<int> out;
  out.reserve(raw.size());
  for (int tok : raw) {
    if (tok == Vocab::eos_id || tok == Vocab::bos_id || tok == Vocab::pad_id) continue;
    if (model.is_marker_token(tok)) continue;
    out.push_back(tok);
  }
  return out;
}

DecodeResult generate_with_length(const CaptionModel& model, const Tensor1& features,
                                  int desired_length, DecodeOpts opts) {
  require_length(model, desired_length);
  opts.desired_length = desired_length;
  switch (model.config().variant) {
    case Variant::base: opts.mode = DecodeMode::fixlen; break;
    case Variant::lenemb: opts.mode = DecodeMode::lenemb; break;
    case Variant::marker: opts.mode = DecodeMode::marker; break;
  }
  const std::vector<Hypothesis> hyps = beam_search(model, features, opts);
  if (hyps.empty()) throw std::logic_error("generate_with_length: no hypotheses");
  const Hypothesis& top = hyps.front();
  DecodeResult res;
  res.caption = content_tokens(top.tokens, model);
  res.logprob = top.logprob;
  res.chosen_length = desired_length;
  res.finished = top.finished;
  return res;
}

DecodeResult generate_with_predicted_length(const CaptionModel& model, const Tensor1& features,
                                            DecodeOpts opts) {
  const Variant variant = model.config().variant;
  if (variant == Variant::base)
    throw std::invalid_argument("generate_with_predicted_length: needs a lenemb or marker model");

  if (variant == Variant::lenemb) {
    const int chosen = argmax_length(model, features);
    DecodeResult res = generate_with_length(model, features, chosen, opts);
    res.chosen_length = chosen;
    return res;
  }

  opts.mode = DecodeMode::marker_free;
  const std::vector<Hypothesis> hyps = beam_search(model, features, opts);
  if (hyps.empty()) throw std::logic_error("generate_with_predicted_length: no hypotheses");
  const Hypothesis& top = hyps.front();
  if (top.tokens.empty() || !model.is_marker_token(top.tokens.front()))
    throw std::logic_error("generate_with_predicted_length: top hypothesis lacks a marker");
  DecodeResult res;
  res.caption = content_tokens(top.tokens, model);
  res.logprob = top.logprob;
  res.chosen_length = model.marker_token_length(top.tokens.front());
  res.finished = top.finished;
  return res;
}

}  // namespace lencap
