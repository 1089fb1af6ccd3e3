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

#include <cstdint>
#include <vector>

#include "lencap/data.hpp"
#include "lencap/model.hpp"

namespace lencap {

struct TrainOpts {
  int epochs = 10;
  int batch_size = 32;
  AdamHyper adam;  // lr 1e-3, betas (0.9, 0.999)
  uint64_t seed = 42;
};

struct EpochLog {
  int epoch;          // 0 = before any update
  double train_loss;  // caption + length terms
  double val_loss;
};

struct TrainResult {
  CaptionModel model;  // parameters at the best validation loss
  std::vector<EpochLog> log;
  double best_val_loss = 0.0;
  int best_epoch = 0;
};

// One example per (image, reference) pair of the given split.
std::vector<TrainExample> make_examples(const Corpus& corpus, const Vocab& vocab,
                                        const std::string& split, int max_length);

// Shuffled mini-batch Adam on cross-entropy (caption loss plus the length
// head's classification loss). Deterministic given (corpus, config, opts).
TrainResult train(const Corpus& corpus, const Vocab& vocab, const ModelConfig& config,
                  const TrainOpts& opts);

}  // namespace lencap
