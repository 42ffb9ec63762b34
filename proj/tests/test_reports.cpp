#include <gtest/gtest.h>

#include <fstream>
#include <set>

#include "privlens/urlsec/reports.hpp"
#include "support.hpp"

using namespace privlens;
using namespace privlens::urlsec;
using corpus::Phase;

namespace {

ScanReport rep(const std::string& d, const std::string& date, std::int64_t pos, std::int64_t total = 70) {
  return {d, *Date::parse(date), pos, total};
}

class FakeReports : public ReportClient {
 public:
  std::vector<ScanReport> reply;
  bool rate_limited = false;
  int calls = 0;
  std::vector<ScanReport> fetch(const std::string&) override {
    ++calls;
    if (rate_limited) throw RateLimited("still limited");
    return reply;
  }
};

class FakeCategories : public CategoryClient {
 public:
  std::optional<std::string> lookup(const std::string& d) override {
    if (d == "boom.com") throw Error("timeout");
    if (d == "known.com") return "news";
    return std::nullopt;
  }
};

}  // namespace

TEST(VtScore, MeanOverAllReports) {
  const std::vector<ScanReport> r = {rep("x.com", "2020-05-01", 3), rep("x.com", "2020-06-01", 5)};
  EXPECT_DOUBLE_EQ(vtscore(r)->score, 4.0);
  const std::vector<ScanReport> mixed = {rep("x.com", "2020-05-01", 0), rep("x.com", "2020-06-01", 6)};
  EXPECT_DOUBLE_EQ(vtscore(mixed)->score, 3.0);
  EXPECT_DOUBLE_EQ(vtscore(mixed, Denominator::PositiveReports)->score, 6.0);
  const std::vector<ScanReport> clean = {rep("x.com", "2020-05-01", 0)};
  EXPECT_FALSE(vtscore(clean));
  EXPECT_FALSE(vtscore({}));
}

TEST(ReportCache, ParsesAndSkipsMalformed) {
  const auto dir = testsupport::scratch_dir("cache");
  const auto path = (dir / "c.jsonl").string();
  std::ofstream(path) << R"({"domain":"A.com","date":"2020-03-01","positives":2,"total":70})" << "\n"
                      << "not json\n"
                      << R"({"domain":"a.com","date":"2020-3-1","positives":2,"total":70})" << "\n"
                      << R"({"domain":"a.com","date":"2020-02-01","positives":9,"total":5})" << "\n"
                      << R"({"domain":"a.com","date":"2019-12-31","positives":1,"total":70})" << "\n"
                      << R"({"domain":"a.com","date":"2020-01-05","positives":1,"total":70})" << "\n\n";
  const auto c = load_report_cache(path);
  EXPECT_EQ(c.malformed, 3u);
  const auto in = load_reports(c, "a.com", default_report_window());
  ASSERT_EQ(in.size(), 2u);
  EXPECT_EQ(in[0].date.iso(), "2020-01-05");
  EXPECT_EQ(load_report_cache((dir / "missing.jsonl").string()).by_domain.size(), 0u);
  EXPECT_EQ(parse_cache_line(to_cache_line(in[1])), in[1]);
}

TEST(FetchReports, WritesThroughAndDeduplicates) {
  const auto dir = testsupport::scratch_dir("fetch");
  const auto path = (dir / "c.jsonl").string();
  ReportCache cache;
  FakeReports client;
  client.reply = {rep("", "2020-04-01", 4), rep("", "2023-01-01", 9)};
  auto r = fetch_reports(cache, path, "y.com", default_report_window(), &client);
  EXPECT_EQ(r.reports.size(), 1u);
  r = fetch_reports(cache, path, "y.com", default_report_window(), &client);
  EXPECT_EQ(load_report_cache(path).by_domain.at("y.com").size(), 2u);
  client.rate_limited = true;
  r = fetch_reports(cache, path, "y.com", default_report_window(), &client);
  EXPECT_EQ(r.reports.size(), 1u);
  ASSERT_EQ(r.warnings.size(), 1u);
  EXPECT_NE(r.warnings[0].find("partial results"), std::string::npos);
  EXPECT_EQ(fetch_reports(cache, path, "y.com", default_report_window(), nullptr).reports.size(), 1u);
  EXPECT_EQ(client.calls, 3);
}

TEST(Categories, MapThenFallback) {
  const auto m = CategoryMap::load((testsupport::data_dir() / "category_map.csv").string());
  EXPECT_GT(m.size(), 0u);
  CategoryMap small = CategoryMap::parse(parse_csv("domain,category\nExample.com, shopping \n"));
  EXPECT_EQ(categorize("example.com", small).category, "shopping");
  FakeCategories f;
  EXPECT_EQ(categorize("known.com", small, &f).category, "news");
  EXPECT_EQ(categorize("other.com", small, &f).category, kUncategorized);
  const auto failed = categorize("boom.com", small, &f);
  EXPECT_EQ(failed.category, kUncategorized);
  EXPECT_TRUE(failed.warning);
  EXPECT_THROW(CategoryMap::parse(parse_csv("site,kind\n")), Error);
}

TEST(Tiers, MonotoneAndInclusive) {
  EXPECT_EQ(tier_of(std::nullopt), 0u);
  EXPECT_EQ(tier_of(2.99), 0u);
  EXPECT_EQ(tier_of(3.0), 1u);
  EXPECT_EQ(tier_of(55.0), 5u);
  double last_tier = 0;
  for (double s = 0; s <= 70; s += 0.25) {
    const auto t = static_cast<double>(tier_of(s));
    EXPECT_GE(t, last_tier);
    last_tier = t;
  }
}

TEST(Tiers, TableMatchesEventCount) {
  // Ten domains with random scores, shares listed event by event and
  // counted directly.
  Rng rng(10);
  struct Share {
    std::size_t domain;
    std::string country;
    Phase phase;
  };
  std::vector<DomainDossier> dossiers(10);
  for (std::size_t i = 0; i < 10; ++i) {
    dossiers[i].domain = "d" + std::to_string(i) + ".com";
    if (i != 0) dossiers[i].score = rng.uniform() * 70.0;
  }
  dossiers[1].score = 10.0;  // exactly on a threshold
  std::vector<Share> shares;
  const char* countries[] = {"AU", "IN", "GB"};
  for (int k = 0; k < 200; ++k) {
    Share s{rng.below(10), countries[rng.below(3)], tier_phases()[rng.below(3)]};
    shares.push_back(s);
    ++dossiers[s.domain].shares[{s.country, s.phase}];
  }
  const auto rows = tier_table(dossiers);
  ASSERT_EQ(rows.size(), 15u);
  for (const auto& row : rows) {
    std::size_t total = 0;
    std::set<std::size_t> distinct;
    for (const auto& s : shares) {
      const auto& sc = dossiers[s.domain].score;
      if (s.phase != row.phase || !sc || *sc < row.threshold) continue;
      ++total;
      distinct.insert(s.domain);
    }
    EXPECT_EQ(row.total, total);
    EXPECT_EQ(row.unique, distinct.size());
  }
  for (std::size_t i = 3; i < rows.size(); ++i) EXPECT_LE(rows[i].total, rows[i - 3].total);
  const auto csv = tier_table_csv(rows);
  EXPECT_EQ(csv.header, (std::vector<std::string>{"threshold", "phase", "total", "unique"}));
  EXPECT_EQ(csv.rows[3][0], "10");
}

TEST(Categories, DistributionPerGroup) {
  std::vector<DomainDossier> d(3);
  d[0] = {"a.com", "news", 5.0, {{{"AU", Phase::During}, 2}}};
  d[1] = {"b.com", "shopping", 12.0, {{{"AU", Phase::During}, 1}, {{"IN", Phase::After}, 4}}};
  d[2] = {"c.com", "news", 1.0, {{{"AU", Phase::During}, 9}}};
  const auto dist = category_distribution(d);
  ASSERT_EQ(dist.size(), 2u);
  const auto& au = dist.at({"AU", Phase::During});
  EXPECT_DOUBLE_EQ(au.at("news"), 0.5);
  EXPECT_DOUBLE_EQ(au.at("shopping"), 0.5);
  EXPECT_DOUBLE_EQ(dist.at({"IN", Phase::After}).at("shopping"), 1.0);
}
