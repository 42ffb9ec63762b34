#include <gtest/gtest.h>

#include "privlens/textmodel/label_map.hpp"
#include "privlens/textmodel/text.hpp"
#include "support.hpp"

using namespace privlens;
using namespace privlens::textmodel;

TEST(Normalize, StripsUrlsMentionsAndPunctuation) {
  EXPECT_EQ(normalize("RT @who: Stay HOME!! https://t.co/xyz #StayHome don't panic"),
            "rt stay home stayhome dont panic");
  EXPECT_EQ(normalize("COVID-19 cases, up 5%"), "covid-19 cases up 5");
  EXPECT_EQ(normalize("email me@example.com"), "email me example com");
  EXPECT_EQ(normalize("café  Zürich"), "café zürich");
}

TEST(Preprocessor, StopwordsAndLemmas) {
  Preprocessor pre(StopwordSet::english_default(), Lemmatizer::parse("charities\tcharity\ntesting\ttest\n"));
  EXPECT_EQ(pre("Supporting the charities and testing centres during COVID-19"),
            (std::vector<std::string>{"supporting", "charity", "test", "centre"}));
}

TEST(Lemmatizer, SuffixRulesAreConservative) {
  const Lemmatizer lem;
  EXPECT_EQ(lem.lemma("stories"), "story");
  EXPECT_EQ(lem.lemma("masks"), "mask");
  EXPECT_EQ(lem.lemma("virus"), "virus");
  EXPECT_EQ(lem.lemma("crisis"), "crisis");
  EXPECT_EQ(lem.lemma("glass"), "glass");
  EXPECT_EQ(lem.lemma("us"), "us");
  EXPECT_THROW(Lemmatizer::parse("no tab here"), ConfigError);
}

TEST(Hashtags, StripAndExplode) {
  EXPECT_EQ(strip_hashtags("Wear a mask #masks #StayHome now"), "Wear a mask   now");
  EXPECT_EQ(strip_hashtags("issue#12 stays"), "issue#12 stays");
  corpus::PostRecord r;
  r.post_id = "p1";
  r.hashtags = {"a", "b", "c"};
  const auto copies = explode_by_hashtags(r);
  ASSERT_EQ(copies.size(), 3u);
  for (std::size_t i = 0; i < 3; ++i) {
    EXPECT_EQ(copies[i].post_id, "p1");
    EXPECT_EQ(copies[i].hashtags, std::vector<std::string>{r.hashtags[i]});
  }
  r.hashtags.clear();
  EXPECT_TRUE(explode_by_hashtags(r).empty());
}

TEST(LabelMap, MergesFoldIds) {
  const auto m = LabelMap::from_json(nlohmann::json::parse(
      R"({"labels":{"0":"masks","2":"schools"},"merges":[{"ids":[1,3],"label":"vaccination"}]})"));
  const std::vector<std::size_t> assign = {0, 1, 2, 3, 3};
  const auto out = apply_label_map(assign, m, 4);
  EXPECT_EQ(out.labels, (std::vector<std::string>{"masks", "vaccination", "schools", "vaccination", "vaccination"}));
  EXPECT_EQ(out.label_counts.at("vaccination"), 3u);
  EXPECT_EQ(m.distinct_labels(4).size(), 3u);
}

TEST(LabelMap, MissingIdsAreReportedTogether) {
  const auto m = LabelMap::from_json(nlohmann::json::parse(R"({"labels":{"0":"a"}})"));
  const std::vector<std::size_t> assign = {0};
  try {
    apply_label_map(assign, m, 3);
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("1, 2"), std::string::npos);
  }
  EXPECT_THROW(LabelMap::from_json(nlohmann::json::parse(
                   R"({"merges":[{"ids":[1,2],"label":"x"},{"ids":[2],"label":"y"}]})")),
               ConfigError);
}

TEST(LabelMap, ShippedMapsCoverTheirIds) {
  const auto dir = testsupport::data_dir();
  const auto h = LabelMap::load((dir / "hashtag_labels.json").string());
  EXPECT_TRUE(h.missing(15).empty());
  EXPECT_EQ(h.distinct_labels(15).size(), 13u);
  const auto t = LabelMap::load((dir / "topic_labels.json").string());
  EXPECT_TRUE(t.missing(15).empty());
  EXPECT_EQ(t.distinct_labels(15).size(), 14u);
}
