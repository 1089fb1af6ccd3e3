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

#include "lencap/checkpoint.hpp"

#include <fstream>
#include <stdexcept>

#include "json.hpp"

namespace lencap {

namespace {
using nlohmann::json;
}

void save_checkpoint(const std::string& path, const CaptionModel& model, const Vocab& vocab,
                     const CheckpointMeta& meta) {
  if (vocab.size() != model.config().vocab_size)
    throw std::invalid_argument("save_checkpoint: vocab/model size mismatch");
  json j;
  j["format_version"] = kCheckpointFormatVersion;
  const ModelConfig& cfg = model.config();
  j["config"] = {{"variant", variant_name(cfg.variant)}, {"vocab_size", cfg.vocab_size},
                 {"embed_dim", cfg.embed_dim},           {"hidden_dim", cfg.hidden_dim},
                 {"feature_dim", cfg.feature_dim},       {"max_length", cfg.max_length}};
  j["vocab"] = vocab.tokens();
  j["vocab_hash"] = vocab.hash_hex();
  j["meta"] = {{"seed", meta.seed},
               {"epochs", meta.epochs},
               {"best_val_loss", meta.best_val_loss},
               {"best_epoch", meta.best_epoch}};

  json params = json::array();
  const ParamStore& store = model.params();
  for (int i = 0; i < store.entry_count(); ++i) {
    ParamStore::ConstFlat f = store.flat(i);
    json p;
    p["name"] = *f.name;
    p["rows"] = f.rows;
    p["cols"] = f.cols;
    p["values"] = *f.value;
    params.push_back(std::move(p));
  }
  j["params"] = std::move(params);

  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("save_checkpoint: cannot write " + path);
  out << j.dump() << '\n';
}

LoadedCheckpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("load_checkpoint: cannot read " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw std::runtime_error("load_checkpoint: malformed JSON in " + path + ": " + e.what());
  }

  const int version = j.at("format_version").get<int>();
  if (version != kCheckpointFormatVersion)
    throw CheckpointVersionError("load_checkpoint: format version " + std::to_string(version) +
                                 " unsupported (expected " + std::to_string(kCheckpointFormatVersion) +
                                 ")");

  ModelConfig cfg;
  const json& jc = j.at("config");
  cfg.variant = variant_from_name(jc.at("variant").get<std::string>());
  cfg.vocab_size = jc.at("vocab_size").get<int>();
  cfg.embed_dim = jc.at("embed_dim").get<int>();
  cfg.hidden_dim = jc.at("hidden_dim").get<int>();
  cfg.feature_dim = jc.at("feature_dim").get<int>();
  cfg.max_length = jc.at("max_length").get<int>();

  Vocab vocab = Vocab::from_token_list(j.at("vocab").get<std::vector<std::string>>());
  if (vocab.size() != cfg.vocab_size)
    throw std::runtime_error("load_checkpoint: vocab length does not match config");
  if (j.at("vocab_hash").get<std::string>() != vocab.hash_hex())
    throw std::runtime_error("load_checkpoint: vocab hash mismatch");

  CaptionModel model(cfg);
  ParamStore& store = model.params();
  const json& params = j.at("params");
  if (static_cast<int>(params.size()) != store.entry_count())
    throw std::runtime_error("load_checkpoint: parameter count mismatch");
  for (int i = 0; i < store.entry_count(); ++i) {
    ParamStore::Flat f = store.flat(i);
    const json& p = params.at(static_cast<size_t>(i));
    if (p.at("name").get<std::string>() != *f.name ||
        p.at("rows").get<int>() != f.rows || p.at("cols").get<int>() != f.cols)
      throw std::runtime_error("load_checkpoint: parameter layout mismatch at " + *f.name);
    std::vector<double> values = p.at("values").get<std::vector<double>>();
    if (values.size() != f.value->size())
      throw std::runtime_error("load_checkpoint: parameter size mismatch at " + *f.name);
    *f.value = std::move(values);
  }

  CheckpointMeta meta;
  const json& jm = j.at("meta");
  meta.seed = jm.at("seed").get<uint64_t>();
  meta.epochs = jm.at("epochs").get<int>();
  meta.best_val_loss = jm.at("best_val_loss").get<double>();
  meta.best_epoch = jm.at("best_epoch").get<int>();

  return LoadedCheckpoint{std::move(model), std::move(vocab), meta};
}

}  // namespace lencap
