#include <gtest/gtest.h>

#include <cmath>

#include "privlens/textmodel/tfidf.hpp"

using namespace privlens;
using namespace privlens::textmodel;

namespace {

using Docs = std::vector<std::vector<std::string>>;

const Docs kDocs = {{"apple", "banana", "apple"}, {"banana", "cherry"}, {"cherry", "cherry", "date"}};

double weight(const SparseVector& v, std::uint32_t i) {
  for (const auto& [t, w] : v.entries) {
    if (t == i) return w;
  }
  return 0.0;
}

}  // namespace

TEST(Tfidf, MatchesReferenceImplementation) {
  // Expected values from scikit-learn TfidfVectorizer(smooth_idf=True, norm="l2").
  const auto vocab = tfidf_fit(kDocs);
  ASSERT_EQ(vocab.terms(), (std::vector<std::string>{"apple", "banana", "cherry", "date"}));
  EXPECT_NEAR(vocab.idf(0), 1.6931471805599454, 1e-12);
  EXPECT_NEAR(vocab.idf(1), 1.2876820724517808, 1e-12);
  const double expected[3][4] = {{0.9347019636214327, 0.35543246785041743, 0, 0},
                                 {0, 0.7071067811865476, 0.7071067811865476, 0},
                                 {0, 0, 0.8355915419449176, 0.5493512310263033}};
  const auto m = tfidf_matrix(vocab, kDocs);
  for (std::size_t d = 0; d < 3; ++d) {
    for (std::uint32_t t = 0; t < 4; ++t) EXPECT_NEAR(weight(m.rows[d], t), expected[d][t], 1e-12) << d << "," << t;
  }
}

TEST(Tfidf, HandComputedWeights) {
  const auto vocab = tfidf_fit(kDocs);
  const auto v = tfidf_transform(vocab, kDocs[0]);
  // tf(apple)=2, df=1; tf(banana)=1, df=2; N=3.
  const double a = 2.0 * (std::log(4.0 / 2.0) + 1.0);
  const double b = 1.0 * (std::log(4.0 / 3.0) + 1.0);
  const double n = std::sqrt(a * a + b * b);
  EXPECT_NEAR(weight(v, 0), a / n, 1e-12);
  EXPECT_NEAR(weight(v, 1), b / n, 1e-12);
}

TEST(Tfidf, RowsAreUnitLength) {
  const auto m = tfidf_matrix(tfidf_fit(kDocs), kDocs);
  for (const auto& r : m.rows) EXPECT_NEAR(r.squared_norm(), 1.0, 1e-12);
}

TEST(Tfidf, InDocumentDuplicationIsInvariant) {
  const auto vocab = tfidf_fit(kDocs);
  for (const auto& d : kDocs) {
    auto twice = d;
    twice.insert(twice.end(), d.begin(), d.end());
    EXPECT_EQ(tfidf_transform(vocab, d), tfidf_transform(vocab, twice));
  }
}

TEST(Tfidf, OutOfVocabulary) {
  const auto vocab = tfidf_fit(kDocs);
  const std::vector<std::string> unseen = {"zebra", "yak"};
  EXPECT_TRUE(tfidf_transform(vocab, unseen).empty());
  const std::vector<std::string> mixed = {"zebra", "date"};
  const auto v = tfidf_transform(vocab, mixed);
  ASSERT_EQ(v.entries.size(), 1u);
  EXPECT_DOUBLE_EQ(v.entries[0].second, 1.0);
  EXPECT_THROW(tfidf_fit(Docs{{}, {}}), Error);
}

TEST(Vocabulary, JsonRoundTrip) {
  const auto v = tfidf_fit(kDocs);
  const auto back = Vocabulary::from_json(nlohmann::json::parse(v.to_json().dump()));
  EXPECT_EQ(back.terms(), v.terms());
  for (std::size_t i = 0; i < v.size(); ++i) EXPECT_EQ(back.idf(i), v.idf(i));
}

TEST(Cosine, Basics) {
  SparseVector a{{{0, 1.0}, {2, 1.0}}};
  SparseVector b{{{2, 2.0}}};
  EXPECT_NEAR(cosine(a, b), 1.0 / std::sqrt(2.0), 1e-15);
  EXPECT_EQ(cosine(a, SparseVector{}), 0.0);
}
