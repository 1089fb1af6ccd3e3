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

#include "lencap/train.hpp"

#include <limits>
#include <stdexcept>

namespace lencap {

namespace {

double eval_loss(const CaptionModel& model, const std::vector<TrainExample>& examples) {
  double total = 0.0;
  for (const auto& ex : examples) total += model.teacher_forced_loss(ex) + model.length_loss(ex);
  return examples.empty() ? 0.0 : total / static_cast<double>(examples.size());
}

}  // namespace

std::vector<TrainExample> make_examples(const Corpus& corpus, const Vocab& vocab,
                                        const std::string& split, int max_length) {
  std::vector<TrainExample> examples;
  for (const CaptionedImage* img : corpus.split_images(split)) {
    for (const auto& ref : img->refs) {
      if (static_cast<int>(ref.size()) > max_length)
        throw std::runtime_error("make_examples: reference longer than max_length");
      TrainExample ex;
      ex.features = img->features;
      ex.tokens = vocab.encode(ref);
      examples.push_back(std::move(ex));
    }
  }
  return examples;
}

TrainResult train(const Corpus& corpus, const Vocab& vocab, const ModelConfig& config,
                  const TrainOpts& opts) {
  if (corpus.images.empty()) throw std::invalid_argument("train: empty corpus");
  if (opts.epochs < 1) throw std::invalid_argument("train: epochs must be >= 1");
  if (opts.batch_size < 1) throw std::invalid_argument("train: batch_size must be >= 1");

  const std::vector<TrainExample> train_examples = make_examples(corpus, vocab, "train", config.max_length);
  const std::vector<TrainExample> val_examples = make_examples(corpus, vocab, "val", config.max_length);
  if (train_examples.empty()) throw std::invalid_argument("train: no training examples");

  CaptionModel model = CaptionModel::init(config, opts.seed);
  CaptionModel best(config);
  AdamHyper hyper = opts.adam;
  Rng shuffle_rng(Rng::mix(opts.seed, 0x7368756666ULL));

  TrainResult result{CaptionModel(config), {}, std::numeric_limits<double>::infinity(), 0};

  const double val0 = eval_loss(model, val_examples);
  result.log.push_back({0, eval_loss(model, train_examples), val0});
  result.best_val_loss = val0;
  result.best_epoch = 0;
  best.params().copy_values_from(model.params());

  std::vector<int> order(train_examples.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);

  for (int epoch = 1; epoch <= opts.epochs; ++epoch) {
    shuffle_rng.shuffle(order);
    double epoch_loss = 0.0;
    size_t seen = 0;
    for (size_t start = 0; start < order.size(); start += static_cast<size_t>(opts.batch_size)) {
      const size_t end = std::min(order.size(), start + static_cast<size_t>(opts.batch_size));
      const double scale = 1.0 / static_cast<double>(end - start);
      for (size_t i = start; i < end; ++i) {
        const TrainExample& ex = train_examples[static_cast<size_t>(order[i])];
        epoch_loss += model.caption_loss_backward(ex, model.params(), scale);
        epoch_loss += model.length_loss_backward(ex, model.params(), scale);
      }
      seen += end - start;
      adam_step(model.params(), hyper);
    }
    const double train_loss = epoch_loss / static_cast<double>(seen);
    const double val_loss = eval_loss(model, val_examples);
    result.log.push_back({epoch, train_loss, val_loss});
    if (!val_examples.empty() && val_loss < result.best_val_loss) {
      result.best_val_loss = val_loss;
      result.best_epoch = epoch;
      best.params().copy_values_from(model.params());
    }
  }

  if (val_examples.empty()) {
    best.params().copy_values_from(model.params());
    result.best_epoch = opts.epochs;
    result.best_val_loss = result.log.back().train_loss;
  }
  result.model.params().copy_values_from(best.params());
  return result;
}

}  // namespace lencap
