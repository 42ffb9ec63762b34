#include <gtest/gtest.h>

#include "oracle.hpp"
#include "privlens/privacy/hmm.hpp"
#include "privlens/textmodel/tfidf.hpp"

using namespace privlens;
using namespace privlens::privacy;

namespace {

// Posts over a few recurring texts, spread across users and clusters.
std::vector<TrainPost> train_posts(const textmodel::Vocabulary& vocab) {
  const std::vector<std::string> texts = {"mask wear shop", "mask wear shop today", "school close week",
                                          "vaccine appointment book", "stock price fall", "lockdown extend city"};
  Rng rng(5);
  std::vector<TrainPost> out;
  for (int i = 0; i < 120; ++i) {
    TrainPost p;
    p.user_id = "u" + std::to_string(rng.below(12));
    p.timestamp = Timestamp(1600000000 + static_cast<std::int64_t>(rng.below(100000)));
    const auto& t = texts[rng.below(texts.size())];
    p.text = t;
    p.vector = textmodel::tfidf_transform(vocab, split(t, ' '));
    p.cluster = rng.below(3);
    p.has_pii = rng.uniform() < 0.3;
    out.push_back(p);
  }
  return out;
}

textmodel::Vocabulary vocab() {
  return textmodel::tfidf_fit(std::vector<std::vector<std::string>>{
      {"mask", "wear", "shop", "today"}, {"school", "close", "week"}, {"vaccine", "appointment", "book"},
      {"stock", "price", "fall"}, {"lockdown", "extend", "city"}});
}

}  // namespace

TEST(Hmm, CountsFromSequences) {
  const auto h = oracle::build({{"u1", {"a", "b", "a"}}, {"u2", {"a", "b"}}});
  ASSERT_EQ(h.size(), 2u);
  const auto a = *h.match_node({}, "a"), b = *h.match_node({}, "b");
  EXPECT_EQ(h.node(a).initial, 2);
  EXPECT_EQ(h.initial_total(), 2);
  EXPECT_EQ(h.transition_count(a, b), 2);
  EXPECT_EQ(h.transition_count(b, a), 1);
  EXPECT_EQ(h.observation_count("u1", a), 2);
  EXPECT_DOUBLE_EQ(h.p_observation("u1", a), 2.0 / 3.0);
  EXPECT_DOUBLE_EQ(h.p_transition(b, a), 1.0);
  EXPECT_DOUBLE_EQ(h.p_initial(a), 1.0);
  EXPECT_THROW(PrivacyHmm(1.5), ConfigError);
}

TEST(Hmm, SimilarityMatching) {
  const auto v = vocab();
  PrivacyHmm h(0.8);
  const auto vec = [&](const std::string& t) { return textmodel::tfidf_transform(v, split(t, ' ')); };
  const auto n0 = h.match_or_add("mask wear shop", vec("mask wear shop"));
  EXPECT_EQ(h.match_or_add("mask wear shop today", vec("mask wear shop today")), n0);
  EXPECT_NE(h.match_or_add("stock price fall", vec("stock price fall")), n0);
  EXPECT_FALSE(h.match_node(vec("school close week")));
  PrivacyHmm strict(1.0);
  strict.add_node("mask wear shop", vec("mask wear shop"));
  EXPECT_FALSE(strict.match_node(vec("mask wear shop today")));
}

TEST(Hmm, MergeIsOrderIndependent) {
  const auto a = oracle::build({{"u1", {"x", "y"}}, {"u2", {"y", "z"}}});
  const auto b = oracle::build({{"u1", {"y", "x"}}, {"u3", {"z"}}});
  const std::vector<PrivacyHmm> ab = {a, b}, ba = {b, a};
  const auto m1 = PrivacyHmm::merge(ab, 0.8);
  const auto m2 = PrivacyHmm::merge(ba, 0.8);
  EXPECT_EQ(m1.to_json().dump(), m2.to_json().dump());
  const auto x = *m1.match_node({}, "x"), y = *m1.match_node({}, "y");
  EXPECT_EQ(m1.transition_count(x, y), 1);
  EXPECT_EQ(m1.transition_count(y, x), 1);
  EXPECT_EQ(m1.observation_count("u1", y), 2);
  EXPECT_EQ(m1.initial_total(), 4);
}

TEST(Hmm, JsonRoundTrip) {
  const auto h = oracle::build({{"u1", {"a", "b", "a"}}, {"u2", {"c", "b"}}});
  const auto back = PrivacyHmm::from_json(nlohmann::json::parse(h.to_json().dump()),
                                          [](const std::string&) { return SparseVector{}; });
  EXPECT_EQ(back.to_json().dump(), h.to_json().dump());
  auto bad = nlohmann::json::parse(h.to_json().dump());
  bad["initial_total"] = 99;
  EXPECT_THROW(PrivacyHmm::from_json(bad, [](const std::string&) { return SparseVector{}; }), Error);
}

TEST(Hmm, WithoutUserObservations) {
  const auto h = oracle::build({{"u1", {"a", "b"}}, {"u2", {"a"}}});
  const auto s = h.without_user_observations("u1");
  const auto a = *s.match_node({}, "a");
  EXPECT_EQ(s.observation_count("u1", a), 0);
  EXPECT_EQ(s.node(a).observation_total, 1);
  EXPECT_EQ(s.transition_count(a, *s.match_node({}, "b")), 1);
}

TEST(BuildHmm, ThreadsGiveIdenticalModels) {
  const auto v = vocab();
  const auto posts = train_posts(v);
  const auto one = build_hmm(posts, 3, 0.8, 1);
  const auto many = build_hmm(posts, 3, 0.8, 4);
  ASSERT_EQ(one.clusters.size(), 3u);
  for (std::size_t c = 0; c < 3; ++c) EXPECT_EQ(one.clusters[c].to_json().dump(), many.clusters[c].to_json().dump());
  EXPECT_EQ(one.merged.to_json().dump(), many.merged.to_json().dump());
  EXPECT_EQ(one.pii.to_json().dump(), many.pii.to_json().dump());
  std::int64_t pii_obs = 0, pii_posts = 0;
  for (const auto& n : one.pii.nodes()) pii_obs += n.observation_total;
  for (const auto& p : posts) pii_posts += p.has_pii ? 1 : 0;
  EXPECT_EQ(pii_obs, pii_posts);
  EXPECT_THROW(build_hmm({}, 3), Error);
}
