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
#include <unordered_map>
#include <vector>

namespace lencap {

// Bidirectional token <-> id map. Layout is fixed: the four reserved tokens,
// then content tokens, then (optionally) the length-marker tokens
// <len_1>..<len_N> as the final N ids. Models rely on that marker block
// sitting at the end of the id range.
class Vocab {
 public:
  static constexpr int pad_id = 0;
  static constexpr int bos_id = 1;
  static constexpr int eos_id = 2;
  static constexpr int unk_id = 3;

  Vocab() = default;

  // content_tokens must be unique and free of reserved/marker spellings;
  // marker_max_len = 0 builds a vocabulary without marker tokens.
  static Vocab build(const std::vector<std::string>& content_tokens, int marker_max_len);

  static Vocab from_token_list(const std::vector<std::string>& tokens);

  int size() const { return static_cast<int>(tokens_.size()); }
  int marker_count() const { return marker_count_; }
  int first_marker_id() const { return size() - marker_count_; }

  int id(const std::string& token) const;  // unk_id when unknown
  const std::string& token(int id) const;

  bool is_special(int id) const { return id >= 0 && id <= unk_id; }
  bool is_marker(int id) const { return marker_count_ > 0 && id >= first_marker_id() && id < size(); }
  int marker_id(int length) const;      // length in [1, marker_count]
  int marker_length(int id) const;      // inverse of marker_id

  std::vector<int> encode(const std::vector<std::string>& words) const;
  std::vector<std::string> decode(const std::vector<int>& ids) const;

  const std::vector<std::string>& tokens() const { return tokens_; }
  uint64_t hash() const;
  std::string hash_hex() const;

  // One token per line; line number = id.
  void save(const std::string& path) const;
  static Vocab load(const std::string& path);

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, int> ids_;
  int marker_count_ = 0;
};

}  // namespace lencap
