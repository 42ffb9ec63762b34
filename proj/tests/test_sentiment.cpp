#include <gtest/gtest.h>

#include <cmath>

#include "privlens/sentiment.hpp"
#include "support.hpp"

using namespace privlens;
using namespace privlens::sentiment;

namespace {

Lexicon small_lexicon() { return Lexicon::parse("good\t1.9\nbad\t-2.5\nlove\t3.2\n# comment\n\nfear\t-2.2\n"); }

}  // namespace

TEST(Compound, KnownValue) {
  EXPECT_NEAR(compound_from_raw(2.0), 2.0 / std::sqrt(19.0), 1e-9);
  EXPECT_EQ(compound_from_raw(0.0), 0.0);
}

TEST(Compound, OddBoundedAndMonotone) {
  Rng rng(42);
  for (int i = 0; i < 10000; ++i) {
    const double x = (rng.uniform() - 0.5) * 40.0;
    const double y = x + rng.uniform() * 5.0 + 1e-6;
    const double cx = compound_from_raw(x);
    EXPECT_EQ(compound_from_raw(-x), -cx);
    EXPECT_LT(std::abs(cx), 1.0);
    EXPECT_LE(cx, compound_from_raw(y));
  }
}

TEST(Score, SumsLexiconValences) {
  const auto lex = small_lexicon();
  const auto s = score("Good, GOOD... but bad! #love", lex);
  EXPECT_NEAR(s.raw_sum, 1.9 + 1.9 - 2.5 + 3.2, 1e-12);
  EXPECT_EQ(score("nothing here", lex).raw_sum, 0.0);
}

TEST(Label, ThresholdBand) {
  auto with = [](double c) { return PolarityScore{0, c}; };
  EXPECT_EQ(label(with(0.05)), Label::Positive);
  EXPECT_EQ(label(with(0.0499)), Label::Neutral);
  EXPECT_EQ(label(with(-0.05)), Label::Negative);
  EXPECT_EQ(label(with(0.001), 0.0), Label::Positive);
  EXPECT_EQ(label(with(0.0), 0.0), Label::Neutral);
  EXPECT_THROW(label(with(0.1), -1.0), Error);
}

TEST(Lexicon, RejectsBadLines) {
  EXPECT_THROW(Lexicon::parse("good"), ConfigError);
  EXPECT_THROW(Lexicon::parse("good\tmany"), ConfigError);
  EXPECT_THROW(Lexicon::parse("good\t9"), ConfigError);
  EXPECT_EQ(Lexicon::load((testsupport::data_dir() / "lexicon.tsv").string()).valence("great"), 3.1);
}

TEST(Aggregator, FractionsSumToOneAndMergeCommutes) {
  Rng rng(1);
  Aggregator a, b, whole;
  const char* topics[] = {"masks", "schools", "sports"};
  const char* phases[] = {"Before", "During", "After"};
  std::map<std::pair<std::string, std::string>, std::array<int, 3>> manual;
  for (int i = 0; i < 3000; ++i) {
    const std::string t = topics[rng.below(3)], p = phases[rng.below(3)];
    const auto l = static_cast<Label>(rng.below(3));
    (i % 2 ? a : b).add(t, p, l);
    whole.add(t, p, l);
    ++manual[{t, p}][static_cast<int>(l)];
  }
  Aggregator ab = a, ba = b;
  ab.merge(b);
  ba.merge(a);
  const auto d = whole.distributions();
  EXPECT_EQ(ab.to_csv().to_string(), whole.to_csv().to_string());
  EXPECT_EQ(ba.to_csv().to_string(), whole.to_csv().to_string());
  for (const auto& [k, dist] : d) {
    EXPECT_NEAR(dist.positive + dist.neutral + dist.negative, 1.0, 1e-12);
    const auto& m = manual.at(k);
    const double n = m[0] + m[1] + m[2];
    EXPECT_EQ(dist.count, static_cast<std::size_t>(n));
    EXPECT_DOUBLE_EQ(dist.positive, m[0] / n);
    EXPECT_DOUBLE_EQ(dist.negative, m[2] / n);
  }
  EXPECT_EQ(whole.to_csv().header, (std::vector<std::string>{"topic", "phase", "positive", "neutral", "negative"}));
}
