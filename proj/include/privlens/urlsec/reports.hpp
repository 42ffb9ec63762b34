#pragma once

// Domain categories, scanner-report caches, VTScore aggregation, suspicion
// tier tables and per-(country, phase) category distributions.

#include <algorithm>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "privlens/corpus.hpp"
#include "privlens/util.hpp"

namespace privlens::urlsec {

inline const std::string kUncategorized = "Uncategorized";
inline const std::string kIpLiteral = "ip-literal";

// ---------------------------------------------------------------------------
// Categories
// ---------------------------------------------------------------------------

// Optional remote lookup consulted on a local-map miss.
class CategoryClient {
 public:
  virtual ~CategoryClient() = default;
  // nullopt: unknown; throws on transport failure.
  virtual std::optional<std::string> lookup(const std::string& domain) = 0;
};

class CategoryMap {
 public:
  // CSV `domain,category`.
  static CategoryMap parse(const CsvTable& t) {
    require_header(t, {"domain", "category"}, "category map");
    CategoryMap m;
    for (const auto& row : t.rows) m.map_[to_lower_ascii(trim(row[0]))] = std::string(trim(row[1]));
    return m;
  }

  static CategoryMap load(const std::string& path) { return parse(load_csv(path)); }

  void set(const std::string& domain, std::string category) { map_[to_lower_ascii(domain)] = std::move(category); }

  std::optional<std::string> find(const std::string& domain) const {
    auto it = map_.find(domain);
    if (it == map_.end()) return std::nullopt;
    return it->second;
  }

  std::size_t size() const { return map_.size(); }

 private:
  std::map<std::string, std::string> map_;
};

struct Categorization {
  std::string category;
  std::optional<std::string> warning;
};

inline Categorization categorize(const std::string& domain, const CategoryMap& map,
                                 CategoryClient* fallback = nullptr) {
  if (auto c = map.find(domain)) return {*c, std::nullopt};
  if (fallback) {
    try {
      if (auto c = fallback->lookup(domain)) return {*c, std::nullopt};
    } catch (const std::exception& e) {
      return {kUncategorized, "category lookup failed for " + domain + ": " + e.what()};
    }
  }
  return {kUncategorized, std::nullopt};
}

// ---------------------------------------------------------------------------
// Scanner reports
// ---------------------------------------------------------------------------

struct ScanReport {
  std::string domain;
  Date date;
  std::int64_t positives = 0;
  std::int64_t total = 1;

  bool operator==(const ScanReport&) const = default;
};

struct DateWindow {
  Date start;  // inclusive
  Date end;    // inclusive
  bool contains(Date d) const { return start <= d && d <= end; }
};

// Collection window used for the scanner reports (1 Jan 2020 - 6 Nov 2021).
inline DateWindow default_report_window() { return {Date(2020, 1, 1), Date(2021, 11, 6)}; }

inline std::string to_cache_line(const ScanReport& r) {
  nlohmann::ordered_json j;
  j["domain"] = r.domain;
  j["date"] = r.date.iso();
  j["positives"] = r.positives;
  j["total"] = r.total;
  return j.dump();
}

inline std::optional<ScanReport> parse_cache_line(std::string_view line) {
  const auto j = nlohmann::json::parse(line, nullptr, false);
  if (j.is_discarded() || !j.is_object()) return std::nullopt;
  if (!j.contains("domain") || !j.contains("date") || !j.contains("positives") || !j.contains("total")) {
    return std::nullopt;
  }
  if (!j["domain"].is_string() || !j["date"].is_string() || !j["positives"].is_number_integer() ||
      !j["total"].is_number_integer()) {
    return std::nullopt;
  }
  const auto d = Date::parse(j["date"].get<std::string>());
  if (!d || j["date"].get<std::string>().size() != 10) return std::nullopt;
  ScanReport r{to_lower_ascii(j["domain"].get<std::string>()), *d, j["positives"].get<std::int64_t>(),
               j["total"].get<std::int64_t>()};
  if (r.positives < 0 || r.total < 1 || r.positives > r.total) return std::nullopt;
  return r;
}

struct ReportCache {
  std::map<std::string, std::vector<ScanReport>> by_domain;  // file order per domain
  std::size_t malformed = 0;
};

// Missing file -> empty cache (offline runs without caches stay valid).
inline ReportCache load_report_cache(const std::string& path) {
  ReportCache c;
  std::ifstream in(path, std::ios::binary);
  if (!in) return c;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    if (auto r = parse_cache_line(line)) {
      c.by_domain[r->domain].push_back(std::move(*r));
    } else {
      ++c.malformed;
    }
  }
  return c;
}

// In-window reports of one domain, sorted by scan date (stable).
inline std::vector<ScanReport> load_reports(const ReportCache& cache, const std::string& domain,
                                            const DateWindow& window) {
  std::vector<ScanReport> out;
  if (auto it = cache.by_domain.find(domain); it != cache.by_domain.end()) {
    for (const auto& r : it->second) {
      if (window.contains(r.date)) out.push_back(r);
    }
  }
  std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.date < b.date; });
  return out;
}

// Live source of reports for one domain.
class ReportClient {
 public:
  virtual ~ReportClient() = default;
  virtual std::vector<ScanReport> fetch(const std::string& domain) = 0;
};

// Raised by clients when the service keeps answering "rate limited".
class RateLimited : public Error {
 public:
  using Error::Error;
};

struct FetchResult {
  std::vector<ScanReport> reports;
  std::vector<std::string> warnings;
};

// Offline: cache only. Live: fetch, append unseen reports to the cache
// file (single writer), then return the merged in-window view.
inline FetchResult fetch_reports(ReportCache& cache, const std::string& cache_path, const std::string& domain,
                                 const DateWindow& window, ReportClient* client) {
  FetchResult out;
  if (client) {
    try {
      auto fresh = client->fetch(domain);
      auto& known = cache.by_domain[domain];
      std::string appended;
      for (auto& r : fresh) {
        r.domain = domain;
        if (std::find(known.begin(), known.end(), r) != known.end()) continue;
        appended += to_cache_line(r) + "\n";
        known.push_back(r);
      }
      if (!appended.empty()) {
        std::ofstream f(cache_path, std::ios::binary | std::ios::app);
        if (!f) throw Error("cannot append to report cache '" + cache_path + "'");
        f << appended;
      }
    } catch (const RateLimited& e) {
      out.warnings.push_back("partial results for " + domain + ": " + e.what());
    }
  }
  out.reports = load_reports(cache, domain, window);
  return out;
}

// ---------------------------------------------------------------------------
// VTScore
// ---------------------------------------------------------------------------

enum class Denominator {
  AllReports,       // sum of positives / all in-window reports
  PositiveReports,  // sum of positives / reports with positives >= 1
};

struct VtScore {
  std::string domain;
  double score = 0.0;
  std::size_t report_count = 0;
  std::optional<DateWindow> window;
};

// Defined only when some report has positives >= 1.
inline std::optional<VtScore> vtscore(std::span<const ScanReport> reports,
                                      Denominator mode = Denominator::AllReports,
                                      std::optional<DateWindow> window = std::nullopt) {
  if (reports.empty()) return std::nullopt;
  std::int64_t sum = 0;
  std::size_t positive_reports = 0;
  for (const auto& r : reports) {
    sum += r.positives;
    if (r.positives >= 1) ++positive_reports;
  }
  if (positive_reports == 0) return std::nullopt;
  VtScore s;
  s.domain = reports.front().domain;
  s.report_count = mode == Denominator::AllReports ? reports.size() : positive_reports;
  s.score = static_cast<double>(sum) / static_cast<double>(s.report_count);
  s.window = window;
  return s;
}

// ---------------------------------------------------------------------------
// Tier table and category distribution
// ---------------------------------------------------------------------------

inline const std::vector<double> kDefaultThresholds = {3, 10, 20, 40, 55};

// A registered domain with its category, optional score and how often it was
// shared per (country, phase).
struct DomainDossier {
  std::string domain;
  std::string category = kUncategorized;
  std::optional<double> score;
  std::map<std::pair<std::string, corpus::Phase>, std::size_t> shares;
};

// Number of thresholds met (score >= t); 0 when unscored.
inline std::size_t tier_of(std::optional<double> score, std::span<const double> thresholds = kDefaultThresholds) {
  if (!score) return 0;
  return static_cast<std::size_t>(
      std::count_if(thresholds.begin(), thresholds.end(), [&](double t) { return *score >= t; }));
}

struct TierRow {
  double threshold = 0.0;
  corpus::Phase phase = corpus::Phase::During;
  std::size_t total = 0;   // suspicious URL shares
  std::size_t unique = 0;  // distinct suspicious domains
};

inline const std::vector<corpus::Phase>& tier_phases() {
  static const std::vector<corpus::Phase> p = {corpus::Phase::Before, corpus::Phase::During, corpus::Phase::After};
  return p;
}

// Rows for every (threshold, phase), thresholds ascending; a domain counts
// at threshold t when score >= t.
inline std::vector<TierRow> tier_table(std::span<const DomainDossier> dossiers,
                                       std::span<const double> thresholds = kDefaultThresholds) {
  std::vector<double> ts(thresholds.begin(), thresholds.end());
  std::sort(ts.begin(), ts.end());
  std::vector<TierRow> rows;
  for (double t : ts) {
    for (auto phase : tier_phases()) {
      TierRow row{t, phase, 0, 0};
      for (const auto& d : dossiers) {
        if (!d.score || *d.score < t) continue;
        std::size_t shares = 0;
        for (const auto& [key, n] : d.shares) {
          if (key.second == phase) shares += n;
        }
        row.total += shares;
        if (shares > 0) ++row.unique;
      }
      rows.push_back(row);
    }
  }
  return rows;
}

inline CsvTable tier_table_csv(std::span<const TierRow> rows) {
  CsvTable t;
  t.header = {"threshold", "phase", "total", "unique"};
  for (const auto& r : rows) {
    t.rows.push_back({fmt_shortest(r.threshold), corpus::phase_name(r.phase), std::to_string(r.total),
                      std::to_string(r.unique)});
  }
  return t;
}

// Per (country, phase): category -> fraction of the suspicious domains
// (score >= min_score) shared in that group. Groups with no suspicious
// domain are omitted.
inline std::map<std::pair<std::string, corpus::Phase>, std::map<std::string, double>> category_distribution(
    std::span<const DomainDossier> dossiers, double min_score = 3.0) {
  std::map<std::pair<std::string, corpus::Phase>, std::map<std::string, std::size_t>> counts;
  for (const auto& d : dossiers) {
    if (!d.score || *d.score < min_score) continue;
    for (const auto& [key, n] : d.shares) {
      if (n > 0) ++counts[key][d.category];
    }
  }
  std::map<std::pair<std::string, corpus::Phase>, std::map<std::string, double>> out;
  for (const auto& [key, cats] : counts) {
    std::size_t total = 0;
    for (const auto& [c, n] : cats) total += n;
    auto& dst = out[key];
    for (const auto& [c, n] : cats) dst[c] = static_cast<double>(n) / static_cast<double>(total);
  }
  return out;
}

}  // namespace privlens::urlsec
