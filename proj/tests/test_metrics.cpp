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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>

#include "doctest.h"
#include "lencap/metrics.hpp"
#include "lencap/rng.hpp"
#include "oracles.hpp"

using namespace lencap;
using namespace lencap::metrics;

namespace {

struct RandomCorpus {
  std::vector<TokenSeq> cands;
  std::vector<RefSet> refs;
};

RandomCorpus random_corpus(Rng& rng, int max_images = 5, int max_tokens = 6, int vocab = 10,
                           int min_len = 1) {
  RandomCorpus corpus;
  const int images = rng.uniform_int(2, max_images);
  for (int i = 0; i < images; ++i) {
    TokenSeq cand;
    const int cand_len = rng.uniform_int(min_len, max_tokens);
    for (int t = 0; t < cand_len; ++t) cand.push_back(rng.uniform_int(0, vocab - 1));
    corpus.cands.push_back(std::move(cand));

    RefSet refs;
    const int n_refs = rng.uniform_int(1, 3);
    for (int r = 0; r < n_refs; ++r) {
      TokenSeq ref;
      const int len = rng.uniform_int(1, max_tokens);
      for (int t = 0; t < len; ++t) ref.push_back(rng.uniform_int(0, vocab - 1));
      refs.push_back(std::move(ref));
    }
    corpus.refs.push_back(std::move(refs));
  }
  return corpus;
}

}  // namespace

TEST_CASE("cider_d: identical candidates on a distinct corpus score exactly 100") {
  const std::vector<TokenSeq> cands = {{10, 11, 12, 13, 14}, {20, 21, 22, 23, 24}};
  const std::vector<RefSet> refs = {{{10, 11, 12, 13, 14}}, {{20, 21, 22, 23, 24}}};
  const IdfTable idf = build_idf(refs);
  CHECK(std::fabs(cider_d(cands, refs, idf) - 100.0) < 1e-9);
  CHECK(std::fabs(mcider(cands, refs, idf) - 100.0) < 1e-9);
}

TEST_CASE("cider_d: no shared n-grams scores zero; empty candidates do not crash") {
  const std::vector<TokenSeq> cands = {{1, 2, 3}, {}};
  const std::vector<RefSet> refs = {{{4, 5, 6}}, {{7, 8, 9, 10}}};
  const IdfTable idf = build_idf(refs);
  CHECK(cider_d(cands, refs, idf) == 0.0);
  CHECK(mcider(cands, refs, idf) == 0.0);
}

TEST_CASE("cider_d and mcider match the brute-force oracle on randomized corpora") {
  Rng rng(2024);
  for (int trial = 0; trial < 60; ++trial) {
    const RandomCorpus corpus = random_corpus(rng);
    const IdfTable idf = build_idf(corpus.refs);
    const double got_cd = cider_d(corpus.cands, corpus.refs, idf);
    const double want_cd = oracles::brute_cider_d(corpus.cands, corpus.refs);
    CHECK(std::fabs(got_cd - want_cd) < 1e-9);
    const double got_mc = mcider(corpus.cands, corpus.refs, idf);
    const double want_mc = oracles::brute_mcider(corpus.cands, corpus.refs);
    CHECK(std::fabs(got_mc - want_mc) < 1e-9);
  }
}

TEST_CASE("five-image toy corpus with 3-word captions matches the oracle") {
  std::vector<TokenSeq> cands = {{1, 2, 3}, {2, 3, 4}, {1, 1, 2}, {5, 6, 7}, {3, 2, 1}};
  std::vector<RefSet> refs = {{{1, 2, 3}, {1, 2, 4}},
                              {{2, 3, 4}},
                              {{1, 1, 1}, {2, 1, 2}},
                              {{5, 6, 8}, {5, 6, 7}},
                              {{3, 2, 1}, {1, 2, 3}}};
  const IdfTable idf = build_idf(refs);
  CHECK(std::fabs(cider_d(cands, refs, idf) - oracles::brute_cider_d(cands, refs)) < 1e-9);
  CHECK(std::fabs(mcider(cands, refs, idf) - oracles::brute_mcider(cands, refs)) < 1e-9);
}

TEST_CASE("mcider equals cider_d with one reference and equal lengths") {
  Rng rng(7);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<TokenSeq> cands;
    std::vector<RefSet> refs;
    const int images = rng.uniform_int(2, 5);
    for (int i = 0; i < images; ++i) {
      const int len = rng.uniform_int(1, 6);
      TokenSeq ref;
      for (int t = 0; t < len; ++t) ref.push_back(rng.uniform_int(0, 9));
      TokenSeq cand;
      for (int t = 0; t < len; ++t) cand.push_back(rng.uniform_int(0, 9));
      cands.push_back(std::move(cand));
      refs.push_back({std::move(ref)});
    }
    const IdfTable idf = build_idf(refs);
    CHECK(std::fabs(mcider(cands, refs, idf) - cider_d(cands, refs, idf)) < 1e-12);
  }
}

TEST_CASE("mcider rewards long candidates and pooled references") {
  SUBCASE("padding an identical candidate with novel words") {
    // same content, ten extra never-seen tokens: the length penalty hits
    // cider_d only
    std::vector<TokenSeq> cands = {{1, 2, 3, 4, 5, 90, 91, 92, 93, 94, 95, 96, 97, 98, 99},
                                   {20, 21, 22, 23, 24}};
    std::vector<RefSet> refs = {{{1, 2, 3, 4, 5}}, {{20, 21, 22, 23, 24}}};
    const IdfTable idf = build_idf(refs);
    const double cd = cider_d(cands, refs, idf);
    const double mc = mcider(cands, refs, idf);
    CHECK(mc >= cd);
    CHECK(std::fabs(cd - oracles::brute_cider_d(cands, refs)) < 1e-9);
    CHECK(std::fabs(mc - oracles::brute_mcider(cands, refs)) < 1e-9);
  }

  SUBCASE("candidate covering two disjoint references") {
    std::vector<TokenSeq> cands = {{1, 2, 3, 4, 11, 12, 13, 14}, {20, 21, 22, 23}};
    std::vector<RefSet> refs = {{{1, 2, 3, 4}, {11, 12, 13, 14}}, {{20, 21, 22, 23}}};
    const IdfTable idf = build_idf(refs);
    CHECK(mcider(cands, refs, idf) > cider_d(cands, refs, idf));
    CHECK(std::fabs(mcider(cands, refs, idf) - oracles::brute_mcider(cands, refs)) < 1e-9);
  }
}

TEST_CASE("cider scores are invariant under a consistent token relabeling") {
  Rng rng(55);
  const RandomCorpus corpus = random_corpus(rng);
  auto relabel = [](const TokenSeq& seq) {
    TokenSeq out;
    for (int t : seq) out.push_back(1000 + 3 * t);
    return out;
  };
  std::vector<TokenSeq> cands2;
  std::vector<RefSet> refs2;
  for (const auto& c : corpus.cands) cands2.push_back(relabel(c));
  for (const auto& rs : corpus.refs) {
    RefSet out;
    for (const auto& r : rs) out.push_back(relabel(r));
    refs2.push_back(std::move(out));
  }
  const IdfTable idf1 = build_idf(corpus.refs);
  const IdfTable idf2 = build_idf(refs2);
  CHECK(std::fabs(cider_d(corpus.cands, corpus.refs, idf1) - cider_d(cands2, refs2, idf2)) < 1e-12);
  CHECK(std::fabs(mcider(corpus.cands, corpus.refs, idf1) - mcider(cands2, refs2, idf2)) < 1e-12);
}

TEST_CASE("idf table definition") {
  // gram 1 appears in both images, gram 2 in one
  const std::vector<RefSet> refs = {{{1, 2}}, {{1, 3}}};
  const IdfTable idf = build_idf(refs);
  CHECK(idf.corpus_size == 2);
  CHECK(idf.lookup(pack_ngram({1}, 0, 1)) == doctest::Approx(0.0));
  CHECK(idf.lookup(pack_ngram({2}, 0, 1)) == doctest::Approx(std::log(2.0)));
  // unseen grams fall back to ln(corpus_size)
  CHECK(idf.lookup(pack_ngram({9}, 0, 1)) == doctest::Approx(std::log(2.0)));
  for (const auto& [gram, value] : idf.idf) CHECK(value >= 0.0);
}

TEST_CASE("bleu4: identities, misses and a hand-computed corpus") {
  const std::vector<TokenSeq> perfect = {{1, 2, 3, 4}, {5, 6, 7, 8, 9}};
  const std::vector<RefSet> perfect_refs = {{{1, 2, 3, 4}, {9, 9, 9, 9}}, {{5, 6, 7, 8, 9}}};
  CHECK(bleu4(perfect, perfect_refs) == doctest::Approx(100.0).epsilon(1e-12));

  const std::vector<TokenSeq> no4 = {{1, 2, 3, 9, 5}};
  const std::vector<RefSet> no4_refs = {{{1, 2, 3, 4, 5}}};
  CHECK(bleu4(no4, no4_refs) == 0.0);

  // three images, precisions 9/11, 6/8, 4/5, 2/3 with brevity penalty 1
  const std::vector<TokenSeq> cands = {{1, 2, 3, 4}, {1, 2, 3, 4, 5}, {7, 7}};
  const std::vector<RefSet> refs = {{{1, 2, 3, 4}}, {{1, 2, 3, 4, 9}}, {{7, 8}}};
  const double wanted =
      100.0 * std::pow((9.0 / 11.0) * (6.0 / 8.0) * (4.0 / 5.0) * (2.0 / 3.0), 0.25);
  CHECK(bleu4(cands, refs) == doctest::Approx(wanted).epsilon(1e-12));
}

TEST_CASE("bleu4 brevity ties resolve toward the shorter reference") {
  const std::vector<TokenSeq> cands = {{1, 2, 3, 4, 5}};
  const std::vector<RefSet> refs = {{{1, 2, 3, 4}, {1, 2, 3, 4, 5, 6}}};
  // closest lengths are 4 and 6; the tie picks 4, so no brevity penalty
  CHECK(bleu4(cands, refs) == doctest::Approx(100.0).epsilon(1e-12));
}

TEST_CASE("rouge_l: identity, disjoint and the hand LCS case") {
  CHECK(rouge_l({{1, 2, 3}}, {{{1, 2, 3}}}) == doctest::Approx(100.0).epsilon(1e-12));
  CHECK(rouge_l({{1, 2, 3}}, {{{4, 5, 6}}}) == 0.0);
  // "a b c d" vs "a c d e": LCS 3, P = R = 3/4 -> F = 75
  CHECK(rouge_l({{1, 2, 3, 4}}, {{{1, 3, 4, 5}}}) == doctest::Approx(75.0).epsilon(1e-12));
}

TEST_CASE("len_mse") {
  CHECK(len_mse({7, 10, 16}, {7, 10, 16}) == 0.0);
  CHECK(len_mse({7, 10}, {7, 12}) == doctest::Approx(2.0));
  Rng rng(9);
  std::vector<int> a, b;
  double expect = 0.0;
  for (int i = 0; i < 30; ++i) {
    a.push_back(rng.uniform_int(1, 30));
    b.push_back(rng.uniform_int(1, 30));
    expect += (a.back() - b.back()) * (a.back() - b.back());
  }
  CHECK(len_mse(a, b) == doctest::Approx(expect / 30.0).epsilon(1e-12));
  CHECK_THROWS_AS(len_mse({1, 2}, {1}), std::invalid_argument);
  CHECK_THROWS_AS(len_mse({}, {}), std::invalid_argument);
}

TEST_CASE("bad_ending_rate") {
  const std::set<int> bad = {100, 101};
  CHECK(bad_ending_rate({{1, 2, 3}}, bad) == 0.0);
  CHECK(bad_ending_rate({{1, 2, 100}}, bad) == 100.0);
  CHECK(bad_ending_rate({{1, 2, 3}, {4, 101}}, bad) == 50.0);
  CHECK(bad_ending_rate({{}}, bad) == 100.0);  // empty caption counts as bad
  CHECK_THROWS_AS(bad_ending_rate({{1}}, {}), std::invalid_argument);
}

TEST_CASE("length_histogram") {
  CHECK(length_histogram({}).empty());
  const std::map<int, int> hist = length_histogram({{1, 2, 3, 4, 5, 6, 7},
                                                    {9, 9, 9, 9, 9, 9, 9},
                                                    {1, 2, 3, 4, 5, 6, 7, 8, 9, 10}});
  CHECK(hist.at(7) == 2);
  CHECK(hist.at(10) == 1);
  int total = 0;
  for (const auto& [len, count] : hist) total += count;
  CHECK(total == 3);
}

TEST_CASE("evaluate_all wires the individual metrics") {
  Rng rng(31);
  const RandomCorpus corpus = random_corpus(rng);
  const std::set<int> bad = {0, 1};
  std::vector<int> desired(corpus.cands.size(), 4);
  const EvalReport report = evaluate_all(corpus.cands, corpus.refs, bad, desired);

  const IdfTable idf = build_idf(corpus.refs);
  CHECK(report.values.at("bleu4") == doctest::Approx(bleu4(corpus.cands, corpus.refs)).epsilon(1e-15));
  CHECK(report.values.at("rougeL") ==
        doctest::Approx(rouge_l(corpus.cands, corpus.refs)).epsilon(1e-15));
  CHECK(report.values.at("ciderD") ==
        doctest::Approx(cider_d(corpus.cands, corpus.refs, idf)).epsilon(1e-15));
  CHECK(report.values.at("mcider") ==
        doctest::Approx(mcider(corpus.cands, corpus.refs, idf)).epsilon(1e-15));
  CHECK(report.values.at("ber") ==
        doctest::Approx(bad_ending_rate(corpus.cands, bad)).epsilon(1e-15));
  std::vector<int> actual;
  for (const auto& c : corpus.cands) actual.push_back(static_cast<int>(c.size()));
  CHECK(report.values.at("lenmse") == doctest::Approx(len_mse(desired, actual)).epsilon(1e-15));

  const EvalReport no_desired = evaluate_all(corpus.cands, corpus.refs, bad, std::nullopt);
  CHECK(no_desired.values.count("lenmse") == 0);

  // every reported score except LenMSE lies in [0, 100]
  for (const auto& [key, value] : report.values) {
    if (key == "lenmse") {
      CHECK(value >= 0.0);
    } else {
      CHECK(value >= 0.0);
      CHECK(value <= 100.0);
    }
  }
}
