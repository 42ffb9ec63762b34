#include <gtest/gtest.h>

#include "privlens/app/config.hpp"
#include "support.hpp"

using namespace privlens;
using namespace privlens::app;

namespace {

// Minimal valid configuration with absolute paths into the shipped data.
nlohmann::json minimal() {
  const auto d = testsupport::data_dir();
  auto p = [&](const char* f) { return (d / f).string(); };
  return {{"corpus", p("corpus_1k.jsonl")},
          {"countries", {"Australia"}},
          {"windows", p("windows.csv")},
          {"lexicon", p("lexicon.tsv")},
          {"gazetteers",
           {{"names", p("gazetteer_names.txt")},
            {"locations", p("gazetteer_locations.txt")},
            {"organisations", p("gazetteer_organisations.txt")}}},
          {"urls", {{"category_map", p("category_map.csv")}, {"public_suffix_list", p("public_suffix_list.dat")}}}};
}

std::vector<std::string> violations(const nlohmann::json& j) {
  try {
    resolve_config(j, testsupport::data_dir());
  } catch (const ConfigErrors& e) {
    return e.violations();
  }
  return {};
}

}  // namespace

TEST(Config, MinimalIsValidWithDefaults) {
  const auto c = resolve_config(minimal(), "/tmp/base");
  EXPECT_EQ(c.hashtag_k, 15u);
  EXPECT_EQ(c.tau_sim, 0.8);
  EXPECT_EQ(c.sentiment_threshold, 0.05);
  EXPECT_EQ(c.thresholds, (std::vector<double>{3, 10, 20, 40, 55}));
  EXPECT_EQ(c.output_dir, std::filesystem::path("/tmp/base/out"));
  EXPECT_TRUE(c.offline);
  EXPECT_FALSE(c.live_scanner);
}

TEST(Config, ShippedConfigValidates) {
  const auto c = validate_config(testsupport::data_dir() / "config.json");
  EXPECT_EQ(c.countries.size(), 4u);
  EXPECT_TRUE(c.topic_labels);
  EXPECT_TRUE(c.report_cache);
}

TEST(Config, RangeViolationNamesKeyAndRange) {
  auto j = minimal();
  j["privacy"] = {{"tau_sim", 1.5}};
  const auto v = violations(j);
  ASSERT_EQ(v.size(), 1u);
  EXPECT_EQ(v[0], "privacy.tau_sim: τ_sim ∈ [0,1] (got 1.5)");
}

TEST(Config, AllViolationsReportedTogether) {
  auto j = minimal();
  j["privacy"] = {{"split_ratio", 1.0}};
  j["sentiment"] = {{"threshold", -0.1}};
  j.erase("lexicon");
  j["colour"] = "blue";
  const auto v = violations(j);
  ASSERT_EQ(v.size(), 4u);
  auto has = [&](const std::string& prefix) {
    return std::any_of(v.begin(), v.end(), [&](const auto& s) { return s.rfind(prefix, 0) == 0; });
  };
  EXPECT_TRUE(has("privacy.split_ratio:"));
  EXPECT_TRUE(has("sentiment.threshold:"));
  EXPECT_TRUE(has("lexicon: required"));
  EXPECT_TRUE(has("colour: unknown key"));
}

TEST(Config, FileAndTypeErrors) {
  auto j = minimal();
  j["windows"] = "nope.csv";
  j["hashtags"] = {{"k", 2.5}};
  j["output"] = {{"format", "xml"}};
  const auto v = violations(j);
  ASSERT_EQ(v.size(), 3u);
  EXPECT_NE(v[0].find("windows: missing file"), std::string::npos);
}

TEST(Config, LiveScannerNeedsCache) {
  auto j = minimal();
  j["urls"]["scanner"] = "live";
  const auto v = violations(j);
  ASSERT_EQ(v.size(), 1u);
  EXPECT_EQ(v[0], "urls.report_cache: required when urls.scanner is \"live\"");
  j["urls"]["report_cache"] = "fresh_cache.jsonl";
  EXPECT_TRUE(violations(j).empty());
}

TEST(Config, UnreadableFileIsConfigError) {
  EXPECT_THROW(validate_config("/nonexistent/privlens.json"), ConfigError);
  const auto dir = testsupport::scratch_dir("config");
  write_file((dir / "bad.json").string(), "{ not json");
  EXPECT_THROW(validate_config(dir / "bad.json"), ConfigErrors);
}
