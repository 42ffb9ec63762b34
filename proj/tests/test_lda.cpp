#include <gtest/gtest.h>

#include <cmath>

#include "privlens/textmodel/lda.hpp"

using namespace privlens;
using namespace privlens::textmodel;

namespace {

using Corpus = std::vector<std::vector<std::uint32_t>>;

// Words 0..9 belong to theme A, 10..19 to theme B; each document draws from
// one theme only. `theme[d]` records which.
Corpus disjoint_corpus(std::size_t docs, std::uint64_t seed, std::vector<int>& theme) {
  Rng rng(seed);
  Corpus c;
  for (std::size_t d = 0; d < docs; ++d) {
    const int t = static_cast<int>(d % 2);
    theme.push_back(t);
    std::vector<std::uint32_t> doc;
    for (int i = 0; i < 20; ++i) doc.push_back(static_cast<std::uint32_t>(t * 10 + rng.below(10)));
    c.push_back(doc);
  }
  return c;
}

LdaOptions opts(std::size_t k, std::uint64_t seed) {
  LdaOptions o;
  o.num_topics = k;
  o.alpha = 0.1;
  o.beta = 0.01;
  o.iterations = 100;
  o.seed = seed;
  return o;
}

}  // namespace

TEST(Lda, DisjointVocabularyTopicsArePure) {
  std::vector<int> theme;
  const auto c = disjoint_corpus(60, 1, theme);
  const auto m = lda_fit(c, 20, opts(2, 7));
  // Purity: fraction of tokens of each topic coming from its majority theme.
  std::int64_t majority = 0, total = 0;
  for (std::size_t k = 0; k < 2; ++k) {
    std::int64_t a = 0, b = 0;
    for (std::size_t w = 0; w < 10; ++w) a += m.topic_word(k, w);
    for (std::size_t w = 10; w < 20; ++w) b += m.topic_word(k, w);
    majority += std::max(a, b);
    total += a + b;
  }
  EXPECT_GE(static_cast<double>(majority) / static_cast<double>(total), 0.95);
}

TEST(Lda, DistributionsNormalised) {
  std::vector<int> theme;
  const auto c = disjoint_corpus(30, 2, theme);
  const auto m = lda_fit(c, 20, opts(3, 1));
  for (std::size_t k = 0; k < 3; ++k) {
    double s = 0;
    for (double p : m.phi_row(k)) s += p;
    EXPECT_NEAR(s, 1.0, 1e-9);
  }
  for (std::size_t d = 0; d < m.num_docs(); ++d) {
    double s = 0;
    for (double p : m.theta_row(d)) s += p;
    EXPECT_NEAR(s, 1.0, 1e-9);
  }
}

TEST(Lda, TokenCountsConservedEverySweep) {
  std::vector<int> theme;
  const auto c = disjoint_corpus(40, 3, theme);
  std::int64_t tokens = 0;
  for (const auto& d : c) tokens += static_cast<std::int64_t>(d.size());
  std::size_t sweeps = 0;
  lda_fit(c, 20, opts(4, 2), [&](std::size_t s, const LdaModel& m) {
    EXPECT_EQ(s, sweeps++);
    EXPECT_EQ(m.total_topic_word(), tokens);
    std::int64_t by_topic = 0;
    for (std::size_t k = 0; k < m.num_topics(); ++k) by_topic += m.topic_total(k);
    EXPECT_EQ(by_topic, tokens);
    for (std::size_t d = 0; d < m.num_docs(); ++d) {
      std::int64_t n = 0;
      for (std::size_t k = 0; k < m.num_topics(); ++k) n += m.doc_topic(d, k);
      EXPECT_EQ(n, m.doc_length(d));
    }
  });
  EXPECT_EQ(sweeps, 101u);
}

TEST(Lda, SeedDeterministic) {
  std::vector<int> theme;
  const auto c = disjoint_corpus(20, 4, theme);
  const auto a = lda_fit(c, 20, opts(3, 9)).to_json().dump();
  const auto b = lda_fit(c, 20, opts(3, 9)).to_json().dump();
  EXPECT_EQ(a, b);
}

TEST(Lda, DefaultAlphaAndErrors) {
  std::vector<int> theme;
  const auto c = disjoint_corpus(10, 5, theme);
  LdaOptions o;
  o.num_topics = 5;
  o.iterations = 2;
  EXPECT_DOUBLE_EQ(lda_fit(c, 20, o).alpha(), 10.0);
  o.num_topics = 0;
  EXPECT_THROW(lda_fit(c, 20, o), Error);
  o.num_topics = 2;
  EXPECT_THROW(lda_fit(Corpus{{}, {}}, 20, o), Error);
}

TEST(Lda, InferenceFoldsIn) {
  std::vector<int> theme;
  const auto c = disjoint_corpus(60, 6, theme);
  const auto m = lda_fit(c, 20, opts(2, 3));
  const std::vector<std::uint32_t> doc = {0, 1, 2, 3, 4, 5, 6, 7, 8, 9};
  const auto inf = lda_infer(m, doc, 50, 1);
  double s = 0;
  for (double p : inf.distribution) s += p;
  EXPECT_NEAR(s, 1.0, 1e-9);
  EXPECT_GT(*std::max_element(inf.distribution.begin(), inf.distribution.end()), 0.8);
  const auto empty = lda_infer(m, {}, 10, 1);
  EXPECT_TRUE(empty.warning);
  EXPECT_DOUBLE_EQ(empty.distribution[0], 0.5);
}

TEST(Lda, JsonRoundTrip) {
  std::vector<int> theme;
  const auto c = disjoint_corpus(10, 7, theme);
  const auto m = lda_fit(c, 20, opts(2, 1));
  const auto back = LdaModel::from_json(nlohmann::json::parse(m.to_json().dump()));
  EXPECT_EQ(back.to_json().dump(), m.to_json().dump());
  for (std::size_t k = 0; k < 2; ++k) EXPECT_EQ(back.phi(k, 3), m.phi(k, 3));
}
