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
#include <stdexcept>
#include <string>

#include "lencap/model.hpp"
#include "lencap/vocab.hpp"

namespace lencap {

inline constexpr int kCheckpointFormatVersion = 1;

// Raised on a readable checkpoint whose format_version is unsupported.
struct CheckpointVersionError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct CheckpointMeta {
  uint64_t seed = 0;
  int epochs = 0;
  double best_val_loss = 0.0;
  int best_epoch = 0;
};

// Versioned JSON with decimal parameter arrays; load(save(x)) reproduces the
// parameters bit-exactly.
void save_checkpoint(const std::string& path, const CaptionModel& model, const Vocab& vocab,
                     const CheckpointMeta& meta);

struct LoadedCheckpoint {
  CaptionModel model;
  Vocab vocab;
  CheckpointMeta meta;
};

// Throws std::runtime_error on malformed files or a format version mismatch.
LoadedCheckpoint load_checkpoint(const std::string& path);

}  // namespace lencap
