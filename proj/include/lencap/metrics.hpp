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
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace lencap {
namespace metrics {

using TokenSeq = std::vector<int>;
using RefSet = std::vector<TokenSeq>;

inline constexpr int kMaxNgram = 4;

// N-grams packed as (id+1) per 16 bits; counts over content tokens only.
struct NgramCounts {
  std::map<uint64_t, int> counts[kMaxNgram];  // index n-1
};

uint64_t pack_ngram(const TokenSeq& seq, int start, int n);
NgramCounts count_ngrams(const TokenSeq& seq);

// idf(g) = ln(corpus_size) - ln(max(df(g), 1)); df counts images whose
// reference set contains g at least once. Lookup of an unseen n-gram
// returns ln(corpus_size).
struct IdfTable {
  std::map<uint64_t, double> idf;
  int corpus_size = 0;
  double log_corpus = 0.0;

  double lookup(uint64_t gram) const;
};

IdfTable build_idf(const std::vector<RefSet>& refs_per_image);

// Consensus n-gram similarity with count clipping against each reference,
// a Gaussian length penalty (sigma = 6) and per-reference averaging.
// Reported on a 0-100 scale: a candidate identical to the sole reference
// scores 100 whenever its n-grams carry nonzero idf.
double cider_d(const std::vector<TokenSeq>& candidates, const std::vector<RefSet>& refs_per_image,
               const IdfTable& idf, double sigma = 6.0);

enum class CiderPooling { sum, max };

// Variant without the length penalty: reference counts are pooled into one
// vector per image (elementwise sum by default) and a single clipped
// similarity is computed against the pool. Same reporting scale as cider_d.
double mcider(const std::vector<TokenSeq>& candidates, const std::vector<RefSet>& refs_per_image,
              const IdfTable& idf, CiderPooling pooling = CiderPooling::sum);

// Corpus-level BLEU-4: clipped modified precision, geometric mean, brevity
// penalty from the closest reference length (ties toward the shorter).
double bleu4(const std::vector<TokenSeq>& candidates, const std::vector<RefSet>& refs_per_image);

// Mean over images of the max-over-references LCS F-measure (beta = 1.2).
double rouge_l(const std::vector<TokenSeq>& candidates, const std::vector<RefSet>& refs_per_image,
               double beta = 1.2);

double len_mse(const std::vector<int>& desired, const std::vector<int>& actual);

// Percent of captions whose final token is in bad_ids; empty captions count
// as bad endings.
double bad_ending_rate(const std::vector<TokenSeq>& candidates, const std::set<int>& bad_ids);

std::map<int, int> length_histogram(const std::vector<TokenSeq>& captions);

const std::vector<std::string>& default_bad_ending_words();

struct EvalReport {
  std::map<std::string, double> values;
  int n_images = 0;
};

// Runs the full metric set over one candidate list. LenMSE is included only
// when desired lengths are provided.
EvalReport evaluate_all(const std::vector<TokenSeq>& candidates,
                        const std::vector<RefSet>& refs_per_image, const std::set<int>& bad_ids,
                        const std::optional<std::vector<int>>& desired_lengths);

}  // namespace metrics
}  // namespace lencap
