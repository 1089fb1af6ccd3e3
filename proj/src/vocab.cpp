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

#include "lencap/vocab.hpp"

#include <fstream>
#include <stdexcept>

namespace lencap {

namespace {
const char* kReserved[4] = {"<pad>", "<bos>", "<eos>", "<unk>"};

std::string marker_spelling(int length) { return "<len_" + std::to_string(length) + ">"; }
}  // namespace

Vocab Vocab::build(const std::vector<std::string>& content_tokens, int marker_max_len) {
  if (marker_max_len < 0) throw std::invalid_argument("Vocab: negative marker count");
  std::vector<std::string> all;
  all.reserve(4 + content_tokens.size() + static_cast<size_t>(marker_max_len));
  for (const char* r : kReserved) all.emplace_back(r);
  for (const auto& t : content_tokens) all.push_back(t);
  for (int l = 1; l <= marker_max_len; ++l) all.push_back(marker_spelling(l));

  Vocab v = from_token_list(all);
  v.marker_count_ = marker_max_len;
  return v;
}

Vocab Vocab::from_token_list(const std::vector<std::string>& tokens) {
  if (tokens.size() < 4) throw std::invalid_argument("Vocab: token list too short");
  for (int i = 0; i < 4; ++i)
    if (tokens[static_cast<size_t>(i)] != kReserved[i])
      throw std::invalid_argument("Vocab: reserved tokens missing or misplaced");

  Vocab v;
  v.tokens_ = tokens;
  for (size_t i = 0; i < tokens.size(); ++i) {
    if (!v.ids_.emplace(tokens[i], static_cast<int>(i)).second)
      throw std::invalid_argument("Vocab: duplicate token " + tokens[i]);
  }
  // Recover the trailing marker block, if any.
  int markers = 0;
  for (int l = 1;; ++l) {
    auto it = v.ids_.find(marker_spelling(l));
    if (it == v.ids_.end()) break;
    markers = l;
  }
  if (markers > 0) {
    for (int l = 1; l <= markers; ++l) {
      if (v.ids_.at(marker_spelling(l)) != v.size() - markers + (l - 1))
        throw std::invalid_argument("Vocab: marker tokens are not the trailing block");
    }
  }
  v.marker_count_ = markers;
  return v;
}

int Vocab::id(const std::string& token) const {
  auto it = ids_.find(token);
  return it == ids_.end() ? unk_id : it->second;
}

const std::string& Vocab::token(int id) const {
  if (id < 0 || id >= size()) throw std::out_of_range("Vocab: id out of range");
  return tokens_[static_cast<size_t>(id)];
}

int Vocab::marker_id(int length) const {
  if (length < 1 || length > marker_count_)
    throw std::out_of_range("Vocab: no marker for length " + std::to_string(length));
  return first_marker_id() + (length - 1);
}

int Vocab::marker_length(int id) const {
  if (!is_marker(id)) throw std::out_of_range("Vocab: id is not a marker");
  return id - first_marker_id() + 1;
}

std::vector<int> Vocab::encode(const std::vector<std::string>& words) const {
  std::vector<int> out;
  out.reserve(words.size());
  for (const auto& w : words) out.push_back(id(w));
  return out;
}

std::vector<std::string> Vocab::decode(const std::vector<int>& ids) const {
  std::vector<std::string> out;
  out.reserve(ids.size());
  for (int i : ids) out.push_back(token(i));
  return out;
}

uint64_t Vocab::hash() const {
  // FNV-1a over tokens with a separator byte.
  uint64_t h = 0xcbf29ce484222325ULL;
  for (const auto& t : tokens_) {
    for (char c : t) {
      h ^= static_cast<unsigned char>(c);
      h *= 0x100000001b3ULL;
    }
    h ^= 0x0a;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string Vocab::hash_hex() const {
  static const char* digits = "0123456789abcdef";
  uint64_t h = hash();
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[static_cast<size_t>(i)] = digits[h & 0xf];
    h >>= 4;
  }
  return out;
}

void Vocab::save(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("Vocab: cannot write " + path);
  for (const auto& t : tokens_) out << t << '\n';
}

Vocab Vocab::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("Vocab: cannot read " + path);
  std::vector<std::string> tokens;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    tokens.push_back(line);
  }
  return from_token_list(tokens);
}

}  // namespace lencap
