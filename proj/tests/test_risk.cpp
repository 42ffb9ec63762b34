#include <gtest/gtest.h>

#include "oracle.hpp"
#include "privlens/privacy/cohort.hpp"
#include "privlens/privacy/risk.hpp"

using namespace privlens;
using namespace privlens::privacy;

TEST(Risk, MatchesBruteForceOracle) {
  Rng rng(2024);
  for (int trial = 0; trial < 200; ++trial) {
    const auto m = oracle::random_micro_corpus(rng);
    const auto model = oracle::build(m.train);
    const auto pii = oracle::build(m.pii);
    const auto c_model = oracle::count(m.train);
    const auto c_pii = oracle::count(m.pii);
    for (const auto& t : m.test) {
      const auto nodes = oracle::lookup(model, t.labels);
      const auto trace = sequence_privacy_nodes(model, pii, t.user, nodes);
      const double expected = oracle::privacy(c_model, c_pii, t.user, t.labels);
      EXPECT_NEAR(trace.privacy_probability, expected, 1e-12) << "trial " << trial << " user " << t.user;
      EXPECT_NEAR(trace.risk, 1.0 - expected, 1e-12);
      EXPECT_NEAR(linkability_prior(pii, t.user).value, oracle::prior(c_pii, t.user), 1e-12);
    }
  }
}

TEST(Risk, HandComputedSequence) {
  // u1: a b a, u2: a b. Start a twice; a->b twice, b->a once.
  const std::vector<oracle::LabelledSequence> train = {{"u1", {"a", "b", "a"}}, {"u2", {"a", "b"}}};
  const auto h = oracle::build(train);
  const PrivacyHmm empty_pii(0.8);
  const auto nodes = oracle::lookup(h, {"a", "b"});
  const auto t = sequence_privacy_nodes(h, empty_pii, "u2", nodes);
  // Step 1: w_T = 1/2, p = 2/2; u2 is 1 of 3 observations at a.
  // Step 2: a->b seen twice of a's 2 successors; u2 is 1 of 2 at b.
  const double s1 = 0.5 * 1.0 * (1.0 - 1.0 / 3.0);
  const double s2 = 0.5 * 1.0 * (1.0 - 1.0 / 2.0);
  EXPECT_NEAR(t.steps[0].factor, s1, 1e-15);
  EXPECT_NEAR(t.steps[1].factor, s2, 1e-15);
  EXPECT_NEAR(t.privacy_probability, s1 * s2, 1e-15);
  EXPECT_EQ(t.prior.value, 1.0);
}

TEST(Risk, ZeroFactorConventions) {
  const auto h = oracle::build({{"u1", {"a", "b"}}, {"u2", {"c"}}});
  // Unseen post.
  auto r = step_factor(h, "u1", PrevStep::begin(), std::nullopt);
  EXPECT_EQ(r.factor, 0.0);
  EXPECT_EQ(r.w_o, 1.0);
  // Transition b->a never observed.
  r = step_factor(h, "u1", PrevStep::after(h.match_node({}, "b")), h.match_node({}, "a"));
  EXPECT_EQ(r.factor, 0.0);
  // Previous post unseen.
  r = step_factor(h, "u1", PrevStep::after(std::nullopt), h.match_node({}, "b"));
  EXPECT_EQ(r.factor, 0.0);
  // User never observed at the node: observation part 1.
  r = step_factor(h, "u3", PrevStep::begin(), h.match_node({}, "a"));
  EXPECT_EQ(r.w_o, 0.0);
  EXPECT_DOUBLE_EQ(r.factor, 1.0 * 0.5);
  // Sole observer: observation part 0.
  r = step_factor(h, "u2", PrevStep::begin(), h.match_node({}, "c"));
  EXPECT_EQ(r.factor, 0.0);
}

TEST(Risk, NonDecreasingInSequenceLength) {
  Rng rng(7);
  for (int trial = 0; trial < 300; ++trial) {
    const auto m = oracle::random_micro_corpus(rng);
    const auto model = oracle::build(m.train);
    const auto pii = oracle::build(m.pii);
    for (const auto& t : m.test) {
      double last = -1.0;
      for (std::size_t n = 1; n <= t.labels.size(); ++n) {
        const std::vector<std::string> prefix(t.labels.begin(), t.labels.begin() + n);
        const auto risk = sequence_privacy_nodes(model, pii, t.user, oracle::lookup(model, prefix)).risk;
        EXPECT_GE(risk, last);
        last = risk;
      }
    }
  }
}

TEST(Prior, UserWithoutPiiNodesGetsOne) {
  const auto pii = oracle::build({{"u1", {"a", "b"}}});
  EXPECT_EQ(linkability_prior(pii, "nobody").value, 1.0);
  const auto p = linkability_prior(pii, "u1");
  EXPECT_GT(p.paths_evaluated, 0u);
  EXPECT_EQ(p.value, 0.0);  // sole observer
  EXPECT_EQ(linkability_prior(pii.without_user_observations("u1"), "u1").value, 1.0);
}

TEST(Prior, CapsTruncate) {
  // Complete digraph on 6 nodes has many simple paths.
  std::vector<oracle::LabelledSequence> seqs;
  const std::vector<std::string> v = {"a", "b", "c", "d", "e", "f"};
  for (const auto& x : v) {
    for (const auto& y : v) {
      if (x != y) seqs.push_back({"u" + x, {x, y}});
    }
  }
  const auto pii = oracle::build(seqs);
  PriorOptions o;
  o.max_paths = 10;
  EXPECT_TRUE(linkability_prior(pii, "ua", o).truncated);
  o.max_paths = 100000;
  o.max_path_length = 2;
  EXPECT_TRUE(linkability_prior(pii, "ua", o).truncated);
  o.max_path_length = 6;
  EXPECT_FALSE(linkability_prior(pii, "ua", o).truncated);
}

TEST(Split, EarliestPostsTrain) {
  struct Rec {
    std::string user_id;
    Timestamp timestamp;
  };
  std::vector<Rec> recs;
  for (int i = 0; i < 10; ++i) recs.push_back({"u", Timestamp(1000 - i)});
  recs.push_back({"solo", Timestamp(5)});
  const auto s = split_train_test<Rec>(recs, 0.7, 1);
  EXPECT_EQ(s.train.size(), 8u);  // 7 of u, 1 of solo
  EXPECT_EQ(s.test, (std::vector<std::size_t>{0, 1, 2}));
  EXPECT_THROW(split_train_test<Rec>(recs, 1.0, 1), ConfigError);
}

TEST(Cohort, RiskVsNAndBreakdown) {
  const auto h = oracle::build({{"u1", {"a", "b"}}, {"u2", {"a", "b"}}, {"u3", {"c"}}});
  const PrivacyHmm pii(0.8);
  auto node = [&](const char* l) { return h.match_node({}, l); };
  std::vector<TestUser> users = {{"u1", {{"t", "During", node("a")}, {"t", "", node("b")}}},
                                 {"u3", {{"s", "Before", node("c")}}}};
  const auto rep = cohort_report(h, pii, users);
  ASSERT_EQ(rep.risk_vs_n.size(), 2u);
  EXPECT_EQ(rep.risk_vs_n[0].users, 2u);
  EXPECT_EQ(rep.risk_vs_n[1].users, 1u);
  // u1 step 1: (1/2)(2/3)(1 - 1/2); u3 step 1: (1/1)(1/3)(1 - 1) = 0.
  const double p1 = 0.5 * (2.0 / 3.0) * 0.5;
  EXPECT_NEAR(rep.risk_vs_n[0].mean_risk, ((1.0 - p1) + 1.0) / 2.0, 1e-15);
  ASSERT_EQ(rep.breakdown.size(), 2u);
  EXPECT_EQ(rep.breakdown[0].topic, "s");
  EXPECT_EQ(rep.breakdown[0].identifiable, 1u);
  EXPECT_EQ(rep.breakdown[0].uniform, 1u);
  for (const auto& row : rep.cdf) EXPECT_NE(row.phase, "");
  EXPECT_EQ(rep.traces.size(), 2u);
}
