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

#include "lencap/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace lencap {
namespace metrics {

namespace {

void check_corpus(const std::vector<TokenSeq>& candidates, const std::vector<RefSet>& refs) {
  if (candidates.empty()) throw std::invalid_argument("metrics: empty corpus");
  if (candidates.size() != refs.size())
    throw std::invalid_argument("metrics: candidate/reference count mismatch");
  for (const RefSet& r : refs)
    if (r.empty()) throw std::invalid_argument("metrics: image without references");
}

struct TfIdfVec {
  std::map<uint64_t, double> w[kMaxNgram];
  double norm[kMaxNgram] = {};
};

TfIdfVec weigh(const NgramCounts& counts, const IdfTable& idf) {
  TfIdfVec vec;
  for (int n = 0; n < kMaxNgram; ++n) {
    double sq = 0.0;
    for (const auto& [gram, cnt] : counts.counts[n]) {
      const double w = cnt * idf.lookup(gram);
      vec.w[n][gram] = w;
      sq += w * w;
    }
    vec.norm[n] = std::sqrt(sq);
  }
  return vec;
}

// sum over n-grams of min(cand, ref) * ref, both tf-idf weighted, divided by
// the product of the unclipped norms.
void clipped_cosine(const NgramCounts& cand, const TfIdfVec& cand_vec, const NgramCounts& ref,
                    const TfIdfVec& ref_vec, const IdfTable& idf, double sim[kMaxNgram]) {
  for (int n = 0; n < kMaxNgram; ++n) {
    double num = 0.0;
    for (const auto& [gram, cnt] : cand.counts[n]) {
      auto it = ref.counts[n].find(gram);
      if (it == ref.counts[n].end()) continue;
      const double w = idf.lookup(gram);
      num += std::min(cnt, it->second) * it->second * w * w;
    }
    sim[n] = (cand_vec.norm[n] > 0.0 && ref_vec.norm[n] > 0.0)
                 ? num / (cand_vec.norm[n] * ref_vec.norm[n])
                 : 0.0;
  }
}

int lcs_length(const TokenSeq& a, const TokenSeq& b) {
  const size_t m = a.size(), n = b.size();
  std::vector<int> prev(n + 1, 0), cur(n + 1, 0);
  for (size_t i = 1; i <= m; ++i) {
    for (size_t j = 1; j <= n; ++j) {
      cur[j] = a[i - 1] == b[j - 1] ? prev[j - 1] + 1 : std::max(prev[j], cur[j - 1]);
    }
    std::swap(prev, cur);
  }
  return prev[n];
}

}  // namespace

uint64_t pack_ngram(const TokenSeq& seq, int start, int n) {
  uint64_t key = 0;
  for (int k = 0; k < n; ++k) {
    const int id = seq[static_cast<size_t>(start + k)];
    if (id < 0 || id >= 0xFFFF) throw std::invalid_argument("pack_ngram: token id out of range");
    key = (key << 16) | static_cast<uint64_t>(id + 1);
  }
  return key;
}

NgramCounts count_ngrams(const TokenSeq& seq) {
  NgramCounts counts;
  const int len = static_cast<int>(seq.size());
  for (int n = 1; n <= kMaxNgram; ++n)
    for (int s = 0; s + n <= len; ++s) counts.counts[n - 1][pack_ngram(seq, s, n)] += 1;
  return counts;
}

double IdfTable::lookup(uint64_t gram) const {
  auto it = idf.find(gram);
  return it == idf.end() ? log_corpus : it->second;
}

IdfTable build_idf(const std::vector<RefSet>& refs_per_image) {
  if (refs_per_image.empty()) throw std::invalid_argument("build_idf: empty corpus");
  IdfTable table;
  table.corpus_size = static_cast<int>(refs_per_image.size());
  table.log_corpus = std::log(static_cast<double>(table.corpus_size));
  std::map<uint64_t, int> df;
  for (const RefSet& refs : refs_per_image) {
    std::set<uint64_t> seen;
    for (const TokenSeq& ref : refs) {
      const NgramCounts counts = count_ngrams(ref);
      for (int n = 0; n < kMaxNgram; ++n)
        for (const auto& [gram, cnt] : counts.counts[n]) seen.insert(gram);
    }
    for (uint64_t gram : seen) df[gram] += 1;
  }
  for (const auto& [gram, count] : df)
    table.idf[gram] = table.log_corpus - std::log(static_cast<double>(std::max(count, 1)));
  return table;
}

double cider_d(const std::vector<TokenSeq>& candidates, const std::vector<RefSet>& refs_per_image,
               const IdfTable& idf, double sigma) {
  check_corpus(candidates, refs_per_image);
  double corpus_sum = 0.0;
  for (size_t i = 0; i < candidates.size(); ++i) {
    const TokenSeq& cand = candidates[i];
    const NgramCounts cand_counts = count_ngrams(cand);
    const TfIdfVec cand_vec = weigh(cand_counts, idf);
    double image_sum = 0.0;
    for (const TokenSeq& ref : refs_per_image[i]) {
      const NgramCounts ref_counts = count_ngrams(ref);
      const TfIdfVec ref_vec = weigh(ref_counts, idf);
      double sim[kMaxNgram];
      clipped_cosine(cand_counts, cand_vec, ref_counts, ref_vec, idf, sim);
      const double delta = static_cast<double>(cand.size()) - static_cast<double>(ref.size());
      const double penalty = std::exp(-delta * delta / (2.0 * sigma * sigma));
      double mean_n = 0.0;
      for (double s : sim) mean_n += s;
      mean_n /= kMaxNgram;
      image_sum += mean_n * penalty;
    }
    corpus_sum += 10.0 * image_sum / static_cast<double>(refs_per_image[i].size());
  }
  return 10.0 * corpus_sum / static_cast<double>(candidates.size());
}

double mcider(const std::vector<TokenSeq>& candidates, const std::vector<RefSet>& refs_per_image,
              const IdfTable& idf, CiderPooling pooling) {
  check_corpus(candidates, refs_per_image);
  double corpus_sum = 0.0;
  for (size_t i = 0; i < candidates.size(); ++i) {
    const NgramCounts cand_counts = count_ngrams(candidates[i]);
    const TfIdfVec cand_vec = weigh(cand_counts, idf);

    NgramCounts pooled;
    for (const TokenSeq& ref : refs_per_image[i]) {
      const NgramCounts ref_counts = count_ngrams(ref);
      for (int n = 0; n < kMaxNgram; ++n) {
        for (const auto& [gram, cnt] : ref_counts.counts[n]) {
          int& slot = pooled.counts[n][gram];
          slot = pooling == CiderPooling::sum ? slot + cnt : std::max(slot, cnt);
        }
      }
    }
    const TfIdfVec pooled_vec = weigh(pooled, idf);
    double sim[kMaxNgram];
    clipped_cosine(cand_counts, cand_vec, pooled, pooled_vec, idf, sim);
    double mean_n = 0.0;
    for (double s : sim) mean_n += s;
    mean_n /= kMaxNgram;
    corpus_sum += 10.0 * mean_n;
  }
  return 10.0 * corpus_sum / static_cast<double>(candidates.size());
}

double bleu4(const std::vector<TokenSeq>& candidates, const std::vector<RefSet>& refs_per_image) {
  check_corpus(candidates, refs_per_image);
  double matched[kMaxNgram] = {};
  double total[kMaxNgram] = {};
  long cand_len = 0;
  long eff_ref_len = 0;

  for (size_t i = 0; i < candidates.size(); ++i) {
    const TokenSeq& cand = candidates[i];
    const RefSet& refs = refs_per_image[i];
    cand_len += static_cast<long>(cand.size());

    int best_ref = static_cast<int>(refs[0].size());
    for (const TokenSeq& ref : refs) {
      const int len = static_cast<int>(ref.size());
      const long d_new = std::labs(static_cast<long>(len) - static_cast<long>(cand.size()));
      const long d_old = std::labs(static_cast<long>(best_ref) - static_cast<long>(cand.size()));
      if (d_new < d_old || (d_new == d_old && len < best_ref)) best_ref = len;
    }
    eff_ref_len += best_ref;

    const NgramCounts cand_counts = count_ngrams(cand);
    NgramCounts max_ref;
    for (const TokenSeq& ref : refs) {
      const NgramCounts rc = count_ngrams(ref);
      for (int n = 0; n < kMaxNgram; ++n)
        for (const auto& [gram, cnt] : rc.counts[n]) {
          int& slot = max_ref.counts[n][gram];
          slot = std::max(slot, cnt);
        }
    }
    for (int n = 0; n < kMaxNgram; ++n) {
      total[n] += std::max(static_cast<int>(cand.size()) - n, 0);
      for (const auto& [gram, cnt] : cand_counts.counts[n]) {
        auto it = max_ref.counts[n].find(gram);
        if (it != max_ref.counts[n].end()) matched[n] += std::min(cnt, it->second);
      }
    }
  }

  double log_prec = 0.0;
  for (int n = 0; n < kMaxNgram; ++n) {
    if (matched[n] <= 0.0 || total[n] <= 0.0) return 0.0;
    log_prec += std::log(matched[n] / total[n]);
  }
  log_prec /= kMaxNgram;
  double bp = 1.0;
  if (cand_len <= 0) return 0.0;
  if (cand_len < eff_ref_len)
    bp = std::exp(1.0 - static_cast<double>(eff_ref_len) / static_cast<double>(cand_len));
  return 100.0 * bp * std::exp(log_prec);
}

double rouge_l(const std::vector<TokenSeq>& candidates, const std::vector<RefSet>& refs_per_image,
               double beta) {
  check_corpus(candidates, refs_per_image);
  double sum = 0.0;
  for (size_t i = 0; i < candidates.size(); ++i) {
    const TokenSeq& cand = candidates[i];
    double best = 0.0;
    for (const TokenSeq& ref : refs_per_image[i]) {
      if (cand.empty() || ref.empty()) continue;
      const int lcs = lcs_length(cand, ref);
      if (lcs == 0) continue;
      const double p = static_cast<double>(lcs) / static_cast<double>(cand.size());
      const double r = static_cast<double>(lcs) / static_cast<double>(ref.size());
      const double f = (1.0 + beta * beta) * p * r / (r + beta * beta * p);
      best = std::max(best, f);
    }
    sum += best;
  }
  return 100.0 * sum / static_cast<double>(candidates.size());
}

double len_mse(const std::vector<int>& desired, const std::vector<int>& actual) {
  if (desired.empty() || desired.size() != actual.size())
    throw std::invalid_argument("len_mse: length lists empty or mismatched");
  double sum = 0.0;
  for (size_t i = 0; i < desired.size(); ++i) {
    const double d = static_cast<double>(desired[i]) - static_cast<double>(actual[i]);
    sum += d * d;
  }
  return sum / static_cast<double>(desired.size());
}

double bad_ending_rate(const std::vector<TokenSeq>& candidates, const std::set<int>& bad_ids) {
  if (bad_ids.empty()) throw std::invalid_argument("bad_ending_rate: empty bad-word set");
  if (candidates.empty()) throw std::invalid_argument("bad_ending_rate: empty candidate list");
  int bad = 0;
  for (const TokenSeq& cand : candidates) {
    if (cand.empty() || bad_ids.count(cand.back())) ++bad;
  }
  return 100.0 * static_cast<double>(bad) / static_cast<double>(candidates.size());
}

std::map<int, int> length_histogram(const std::vector<TokenSeq>& captions) {
  std::map<int, int> hist;
  for (const TokenSeq& c : captions) hist[static_cast<int>(c.size())] += 1;
  return hist;
}

const std::vector<std::string>& default_bad_ending_words() {
  static const std::vector<std::string> words = {"a",     "an",    "the", "in", "for",  "at",
                                                 "of",    "with",  "before", "after", "on", "upon",
                                                 "near",  "to",    "is",  "are", "am",  "and"};
  return words;
}

EvalReport evaluate_all(const std::vector<TokenSeq>& candidates,
                        const std::vector<RefSet>& refs_per_image, const std::set<int>& bad_ids,
                        const std::optional<std::vector<int>>& desired_lengths) {
  EvalReport report;
  report.n_images = static_cast<int>(candidates.size());
  const IdfTable idf = build_idf(refs_per_image);
  report.values["bleu4"] = bleu4(candidates, refs_per_image);
  report.values["rougeL"] = rouge_l(candidates, refs_per_image);
  report.values["ciderD"] = cider_d(candidates, refs_per_image, idf);
  report.values["mcider"] = mcider(candidates, refs_per_image, idf);
  report.values["ber"] = bad_ending_rate(candidates, bad_ids);
  if (desired_lengths) {
    std::vector<int> actual;
    actual.reserve(candidates.size());
    for (const TokenSeq& c : candidates) actual.push_back(static_cast<int>(c.size()));
    report.values["lenmse"] = len_mse(*desired_lengths, actual);
  }
  return report;
}

}  // namespace metrics
}  // namespace lencap
