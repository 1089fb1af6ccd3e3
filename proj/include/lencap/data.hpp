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
#include <string>
#include <vector>

#include "lencap/rng.hpp"
#include "lencap/tensor.hpp"
#include "lencap/vocab.hpp"

namespace lencap {

// Attribute catalogs for synthetic scenes. Indices into these lists are the
// stored representation; words are the rendered one.
const std::vector<std::string>& category_words();                 // 12
const std::vector<std::string>& color_words();                    // 8
const std::vector<std::string>& size_words();                     // 3
const std::vector<std::vector<std::string>>& relation_phrases();  // 6
const std::vector<std::string>& setting_words();                  // 6
const std::vector<std::vector<std::string>>& modifier_phrases();  // 4

struct SceneObject {
  int category = 0;
  int color = -1;  // -1 = absent
  int size = -1;   // -1 = absent
};

struct Scene {
  std::vector<SceneObject> objects;  // 1..4, distinct categories
  std::vector<int> relations;        // between consecutive objects; size = objects-1
  int setting = 0;
  int modifier = -1;  // -1 = absent

  void validate() const;  // throws std::invalid_argument
};

std::string scene_signature(const Scene& scene);

struct CaptionedImage {
  int id = 0;
  std::string split;  // train | val | test
  Tensor1 features;
  Scene scene;
  std::vector<std::vector<std::string>> refs;
};

struct Corpus {
  std::vector<CaptionedImage> images;
  std::vector<const CaptionedImage*> split_images(const std::string& split) const;
};

inline constexpr int kFeatureDim = 32;
inline constexpr double kFeatureNoiseSigma = 0.1;
inline const std::vector<int> kTargetLengths = {7, 10, 16, 22, 28};

// Renders one reference per target length (±1 token). References for longer
// targets mention a strict superset of the scene's attributes relative to
// shorter ones. Throws std::runtime_error when the scene cannot support a
// target even at full verbosity.
std::vector<std::vector<std::string>> render_references(const Scene& scene,
                                                        const std::vector<int>& targets);

// Number of scene attribute instances (objects, colors, sizes, relations,
// setting, modifier) mentioned by a rendered reference. Used by generator
// self-checks.
int count_attribute_mentions(const Scene& scene, const std::vector<std::string>& ref);
int total_attribute_count(const Scene& scene);

int multi_hot_dim();
Tensor1 scene_multi_hot(const Scene& scene);
Tensor2 make_feature_projection(uint64_t seed);
Tensor1 scene_to_features(const Scene& scene, const Tensor2& projection, double noise_sigma,
                          Rng& noise_rng);

// Deterministic synthetic corpus: disjoint scenes across splits, five
// references per image at the target lengths, features from a corpus-global
// projection plus per-image noise.
Corpus gen_corpus(int n_train, int n_val, int n_test, uint64_t seed);

// All reference tokens (no frequency cutoff), plus marker tokens
// <len_1>..<len_marker_max_len> when marker_max_len > 0.
Vocab build_vocab(const Corpus& corpus, int marker_max_len);

void save_corpus_jsonl(const Corpus& corpus, const std::string& path);
Corpus load_corpus_jsonl(const std::string& path);

}  // namespace lencap
