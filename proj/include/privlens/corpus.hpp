#pragma once

// Post-corpus ingestion, geo/language filtering, lockdown-phase
// classification, infection rates and descriptive histograms.

#include <functional>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <unordered_set>
#include <variant>
#include <vector>

#include "json.hpp"
#include "privlens/util.hpp"

namespace privlens::corpus {

struct PostRecord {
  std::string user_id;
  std::string post_id;
  Timestamp timestamp;
  std::string text;
  std::vector<std::string> hashtags;  // without leading '#'
  std::vector<std::string> urls;      // expanded, absolute
  std::optional<std::string> country;
  std::optional<std::string> language;

  bool operator==(const PostRecord&) const = default;
};

enum class Phase { Before, During, After, Unclassified };

inline const char* phase_name(Phase p) {
  switch (p) {
    case Phase::Before: return "Before";
    case Phase::During: return "During";
    case Phase::After: return "After";
    case Phase::Unclassified: return "Unclassified";
  }
  return "Unclassified";
}

inline std::optional<Phase> parse_phase(std::string_view s) {
  if (s == "Before") return Phase::Before;
  if (s == "During") return Phase::During;
  if (s == "After") return Phase::After;
  if (s == "Unclassified") return Phase::Unclassified;
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Loading
// ---------------------------------------------------------------------------

// Maps PostRecord fields onto (possibly dotted) JSON paths in the input.
// Hashtag and URL arrays may hold plain strings or objects; for objects the
// `hashtag_key` / `url_key` member is used (tweet-style `entities`).
struct SchemaMap {
  std::string user_id = "user_id";
  std::string post_id = "post_id";
  std::string timestamp = "timestamp";
  std::string text = "text";
  std::string hashtags = "hashtags";
  std::string urls = "urls";
  std::string country = "country";
  std::string language = "language";
  std::string hashtag_key = "text";
  std::string url_key = "expanded_url";

  static SchemaMap from_json(const nlohmann::json& j) {
    SchemaMap m;
    auto take = [&](const char* key, std::string& dst) {
      if (j.contains(key)) {
        if (!j.at(key).is_string()) throw ConfigError(std::string("schema map: '") + key + "' must be a string");
        dst = j.at(key).get<std::string>();
      }
    };
    for (auto it = j.begin(); it != j.end(); ++it) {
      static const std::set<std::string> known{"user_id", "post_id", "timestamp", "text",
                                               "hashtags", "urls", "country", "language",
                                               "hashtag_key", "url_key"};
      if (!known.count(it.key())) throw ConfigError("schema map: unknown field '" + it.key() + "'");
    }
    take("user_id", m.user_id);
    take("post_id", m.post_id);
    take("timestamp", m.timestamp);
    take("text", m.text);
    take("hashtags", m.hashtags);
    take("urls", m.urls);
    take("country", m.country);
    take("language", m.language);
    take("hashtag_key", m.hashtag_key);
    take("url_key", m.url_key);
    return m;
  }
};

struct LoadOptions {
  SchemaMap schema;
  std::optional<Date> span_start;  // inclusive corpus date span
  std::optional<Date> span_end;
};

struct LoadSummary {
  std::size_t lines = 0;
  std::size_t loaded = 0;
  std::size_t skipped = 0;
  std::map<std::string, std::size_t> skip_reasons;
};

namespace detail {

inline const nlohmann::json* lookup(const nlohmann::json& obj, const std::string& path) {
  const nlohmann::json* cur = &obj;
  for (const auto& part : split(path, '.')) {
    if (!cur->is_object()) return nullptr;
    auto it = cur->find(part);
    if (it == cur->end()) return nullptr;
    cur = &*it;
  }
  return cur;
}

inline std::optional<std::string> opt_string(const nlohmann::json& obj, const std::string& path) {
  const auto* v = lookup(obj, path);
  if (!v || v->is_null()) return std::nullopt;
  if (v->is_string()) {
    auto s = v->get<std::string>();
    if (s.empty()) return std::nullopt;
    return s;
  }
  if (v->is_number_integer()) return std::to_string(v->get<long long>());
  return std::nullopt;
}

inline std::vector<std::string> string_list(const nlohmann::json& obj, const std::string& path,
                                            const std::string& key) {
  std::vector<std::string> out;
  const auto* v = lookup(obj, path);
  if (!v || !v->is_array()) return out;
  for (const auto& e : *v) {
    if (e.is_string()) {
      out.push_back(e.get<std::string>());
    } else if (e.is_object() && e.contains(key) && e.at(key).is_string()) {
      out.push_back(e.at(key).get<std::string>());
    }
  }
  return out;
}

}  // namespace detail

// Parses one JSONL line. Returns the record, or the skip reason.
inline std::variant<PostRecord, std::string> parse_record(std::string_view line,
                                                          const LoadOptions& opts) {
  const auto j = nlohmann::json::parse(line, nullptr, false);
  if (j.is_discarded()) return std::string("malformed JSON");
  if (!j.is_object()) return std::string("not a JSON object");
  const auto& s = opts.schema;
  PostRecord r;
  auto user = detail::opt_string(j, s.user_id);
  if (!user) return std::string("missing user_id");
  auto pid = detail::opt_string(j, s.post_id);
  if (!pid) return std::string("missing post_id");
  auto ts = detail::opt_string(j, s.timestamp);
  if (!ts) return std::string("missing timestamp");
  const auto* text = detail::lookup(j, s.text);
  if (!text || !text->is_string()) return std::string("missing text");
  auto parsed = Timestamp::parse(*ts);
  if (!parsed) return std::string("unparseable timestamp");
  const Date d = parsed->date();
  if ((opts.span_start && d < *opts.span_start) || (opts.span_end && d > *opts.span_end)) {
    return std::string("timestamp outside corpus span");
  }
  r.user_id = std::move(*user);
  r.post_id = std::move(*pid);
  r.timestamp = *parsed;
  r.text = text->get<std::string>();
  for (auto& h : detail::string_list(j, s.hashtags, s.hashtag_key)) {
    if (!h.empty() && h.front() == '#') h.erase(0, 1);
    if (h.empty()) continue;
    if (has_whitespace(h)) return std::string("hashtag contains whitespace");
    r.hashtags.push_back(std::move(h));
  }
  r.urls = detail::string_list(j, s.urls, s.url_key);
  r.country = detail::opt_string(j, s.country);
  r.language = detail::opt_string(j, s.language);
  return r;
}

// Streams records in file order to `sink`. Malformed or incomplete lines are
// skipped and tallied; more than half the lines skipped is fatal.
inline LoadSummary for_each_record(const std::string& path, const LoadOptions& opts,
                                   const std::function<void(PostRecord&&)>& sink) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read corpus '" + path + "'");
  LoadSummary summary;
  std::unordered_set<std::string> seen_ids;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    ++summary.lines;
    auto parsed = parse_record(line, opts);
    if (auto* reason = std::get_if<std::string>(&parsed)) {
      ++summary.skipped;
      ++summary.skip_reasons[*reason];
      continue;
    }
    auto& rec = std::get<PostRecord>(parsed);
    if (!seen_ids.insert(rec.post_id).second) {
      ++summary.skipped;
      ++summary.skip_reasons["duplicate post_id"];
      continue;
    }
    ++summary.loaded;
    sink(std::move(rec));
  }
  if (summary.lines > 0 && summary.skipped * 2 > summary.lines) {
    std::string detail;
    for (const auto& [reason, n] : summary.skip_reasons) {
      detail += (detail.empty() ? "" : "; ") + reason + ": " + std::to_string(n);
    }
    throw Error("schema mismatch: " + std::to_string(summary.skipped) + " of " +
                std::to_string(summary.lines) + " lines skipped (" + detail + ")");
  }
  return summary;
}

struct LoadedCorpus {
  std::vector<PostRecord> records;
  LoadSummary summary;
};

inline LoadedCorpus load_corpus(const std::string& path, const LoadOptions& opts = {}) {
  LoadedCorpus out;
  out.summary = for_each_record(path, opts, [&](PostRecord&& r) { out.records.push_back(std::move(r)); });
  return out;
}

// Canonical JSONL form, readable back with the default SchemaMap.
inline nlohmann::ordered_json to_json(const PostRecord& r) {
  nlohmann::ordered_json j;
  j["user_id"] = r.user_id;
  j["post_id"] = r.post_id;
  j["timestamp"] = r.timestamp.iso();
  j["text"] = r.text;
  j["hashtags"] = r.hashtags;
  j["urls"] = r.urls;
  j["country"] = r.country ? nlohmann::ordered_json(*r.country) : nlohmann::ordered_json(nullptr);
  j["language"] = r.language ? nlohmann::ordered_json(*r.language) : nlohmann::ordered_json(nullptr);
  return j;
}

inline std::string to_jsonl(std::span<const PostRecord> records) {
  std::string out;
  for (const auto& r : records) {
    out += to_json(r).dump();
    out.push_back('\n');
  }
  return out;
}

// ---------------------------------------------------------------------------
// Filtering
// ---------------------------------------------------------------------------

struct FilterResult {
  std::vector<PostRecord> records;
  std::size_t dropped_missing = 0;   // country or language absent
  std::size_t dropped_mismatch = 0;  // present but not requested
};

inline FilterResult filter_corpus(std::span<const PostRecord> records,
                                  const std::set<std::string>& countries,
                                  const std::string& language) {
  if (countries.empty()) throw ConfigError("filter_corpus: country set must be non-empty");
  FilterResult out;
  for (const auto& r : records) {
    if (!r.country || !r.language) {
      ++out.dropped_missing;
    } else if (countries.count(*r.country) && *r.language == language) {
      out.records.push_back(r);
    } else {
      ++out.dropped_mismatch;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Lockdown windows
// ---------------------------------------------------------------------------

struct PeriodWindow {
  std::string country;
  Phase phase = Phase::During;
  Date start;  // inclusive
  Date end;    // inclusive

  std::int64_t day_count() const { return end - start + 1; }
  bool contains(Date d) const { return start <= d && d <= end; }
};

// Per-country windows, validated on construction (start <= end, no overlap).
class WindowTable {
 public:
  WindowTable() = default;
  explicit WindowTable(std::vector<PeriodWindow> windows) {
    for (auto& w : windows) {
      if (w.phase == Phase::Unclassified) throw ConfigError("window phase must be Before/During/After");
      if (w.start > w.end) {
        throw ConfigError("window " + w.country + " " + w.start.iso() + ".." + w.end.iso() +
                          ": start after end");
      }
      by_country_[w.country].push_back(std::move(w));
    }
    for (auto& [country, ws] : by_country_) {
      std::sort(ws.begin(), ws.end(), [](const auto& a, const auto& b) { return a.start < b.start; });
      for (std::size_t i = 1; i < ws.size(); ++i) {
        if (ws[i].start <= ws[i - 1].end) {
          throw ConfigError("overlapping windows for " + country + ": " + ws[i - 1].start.iso() +
                            ".." + ws[i - 1].end.iso() + " and " + ws[i].start.iso() + ".." +
                            ws[i].end.iso());
        }
      }
    }
  }

  std::span<const PeriodWindow> for_country(const std::string& country) const {
    auto it = by_country_.find(country);
    if (it == by_country_.end()) return {};
    return it->second;
  }

  const std::map<std::string, std::vector<PeriodWindow>>& all() const { return by_country_; }

 private:
  std::map<std::string, std::vector<PeriodWindow>> by_country_;
};

// Reads `country,phase,start,end`.
inline WindowTable parse_windows(const CsvTable& t) {
  require_header(t, {"country", "phase", "start", "end"}, "windows file");
  std::vector<PeriodWindow> ws;
  for (const auto& row : t.rows) {
    auto phase = parse_phase(row[1]);
    auto start = Date::parse(row[2]);
    auto end = Date::parse(row[3]);
    if (!phase || *phase == Phase::Unclassified) throw ConfigError("windows file: bad phase '" + row[1] + "'");
    if (!start || !end || row[2].size() != 10 || row[3].size() != 10) {
      throw ConfigError("windows file: bad date in row for " + row[0]);
    }
    ws.push_back({row[0], *phase, *start, *end});
  }
  return WindowTable(std::move(ws));
}

inline WindowTable load_windows(const std::string& path) { return parse_windows(load_csv(path)); }

// Windows must already be validated (they are, when taken from a WindowTable).
inline Phase classify_period(Timestamp ts, std::span<const PeriodWindow> windows) {
  const Date d = ts.date();
  for (const auto& w : windows) {
    if (w.contains(d)) return w.phase;
  }
  return Phase::Unclassified;
}

inline Phase classify_record(const PostRecord& r, const WindowTable& table) {
  if (!r.country) return Phase::Unclassified;
  return classify_period(r.timestamp, table.for_country(*r.country));
}

// Turns a daily stringency series (`country,date,stringency`) into windows:
// every maximal run of days with index >= threshold is a During window,
// flanked by Before/After windows of `flank_days` clipped against neighbours.
inline WindowTable windows_from_stringency(const CsvTable& t, double threshold = 65.0,
                                           int flank_days = 16) {
  require_header(t, {"country", "date", "stringency"}, "stringency file");
  std::map<std::string, std::map<Date, double>> series;
  for (const auto& row : t.rows) {
    auto d = Date::parse(row[1]);
    auto v = parse_double(row[2]);
    if (!d || !v) throw ConfigError("stringency file: bad row for " + row[0]);
    series[row[0]][*d] = *v;
  }
  std::vector<PeriodWindow> out;
  for (const auto& [country, days] : series) {
    std::vector<std::pair<Date, Date>> runs;
    std::optional<Date> run_start;
    std::optional<Date> prev;
    for (const auto& [d, v] : days) {
      const bool hot = v >= threshold;
      const bool contiguous = prev && d - *prev == 1;
      if (run_start && (!hot || !contiguous)) {
        runs.emplace_back(*run_start, *prev);
        run_start.reset();
      }
      if (hot && !run_start) run_start = d;
      prev = d;
    }
    if (run_start) runs.emplace_back(*run_start, *prev);
    for (std::size_t i = 0; i < runs.size(); ++i) {
      const auto [s, e] = runs[i];
      Date before_start = s + (-flank_days);
      if (i > 0) {
        // Previous run's After window takes [prev_end+1, prev_end+flank].
        const Date limit = runs[i - 1].second + (flank_days + 1);
        before_start = std::max(before_start, limit);
      }
      if (before_start <= s + (-1)) out.push_back({country, Phase::Before, before_start, s + (-1)});
      out.push_back({country, Phase::During, s, e});
      Date after_end = e + flank_days;
      if (i + 1 < runs.size()) after_end = std::min(after_end, runs[i + 1].first + (-1));
      if (e + 1 <= after_end) out.push_back({country, Phase::After, e + 1, after_end});
    }
  }
  return WindowTable(std::move(out));
}

// ---------------------------------------------------------------------------
// Infection rate
// ---------------------------------------------------------------------------

struct CaseSeries {
  std::string country;
  std::vector<std::pair<Date, std::int64_t>> entries;  // strictly increasing dates

  void validate() const {
    for (std::size_t i = 0; i < entries.size(); ++i) {
      if (entries[i].second < 0) throw ConfigError("case series " + country + ": negative count");
      if (i && entries[i].first <= entries[i - 1].first) {
        throw ConfigError("case series " + country + ": dates not strictly increasing");
      }
    }
  }
};

// Reads `country,date,new_cases`, returning one series per country.
inline std::map<std::string, CaseSeries> parse_case_series(const CsvTable& t) {
  require_header(t, {"country", "date", "new_cases"}, "case series");
  std::map<std::string, CaseSeries> out;
  for (const auto& row : t.rows) {
    auto d = Date::parse(row[1]);
    auto n = parse_int(row[2]);
    if (!d || !n) throw ConfigError("case series: bad row for " + row[0]);
    auto& s = out[row[0]];
    s.country = row[0];
    s.entries.emplace_back(*d, *n);
  }
  for (auto& [c, s] : out) s.validate();
  return out;
}

inline std::map<std::string, CaseSeries> load_case_series(const std::string& path) {
  return parse_case_series(load_csv(path));
}

struct InfectionRate {
  PeriodWindow window;
  double ir = 0.0;
};

// Mean daily cases over the inclusive window. Every day of the window must be
// present in the series.
inline InfectionRate infection_rate(const CaseSeries& series, const PeriodWindow& window) {
  std::int64_t total = 0;
  std::int64_t covered = 0;
  for (const auto& [d, n] : series.entries) {
    if (window.contains(d)) {
      total += n;
      ++covered;
    }
  }
  if (covered != window.day_count()) {
    throw Error("insufficient case data for " + window.country + " " + window.start.iso() + ".." +
                window.end.iso() + " (" + std::to_string(covered) + " of " +
                std::to_string(window.day_count()) + " days)");
  }
  return {window, static_cast<double>(total) / static_cast<double>(window.day_count())};
}

// ---------------------------------------------------------------------------
// Descriptive statistics
// ---------------------------------------------------------------------------

// Histograms are commutative monoids: shard results combine with merge().
struct CorpusStats {
  std::map<std::size_t, std::size_t> posts_per_user;     // posts -> users
  std::map<std::size_t, std::size_t> hashtags_per_post;  // hashtags -> posts
  std::map<std::pair<std::string, Phase>, std::size_t> posts_per_phase;  // (country, phase)
  std::size_t total_posts = 0;

  void merge(const CorpusStats& o) {
    for (const auto& [k, v] : o.posts_per_user) posts_per_user[k] += v;
    for (const auto& [k, v] : o.hashtags_per_post) hashtags_per_post[k] += v;
    for (const auto& [k, v] : o.posts_per_phase) posts_per_phase[k] += v;
    total_posts += o.total_posts;
  }
};

// `phases[i]` labels `records[i]`. Posts-per-user counts need the whole
// corpus of a user in one call; the other histograms shard freely.
inline CorpusStats corpus_stats(std::span<const PostRecord> records, std::span<const Phase> phases) {
  if (records.size() != phases.size()) throw Error("corpus_stats: phase labels do not match records");
  CorpusStats s;
  std::map<std::string, std::size_t> per_user;
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto& r = records[i];
    ++per_user[r.user_id];
    ++s.hashtags_per_post[r.hashtags.size()];
    ++s.posts_per_phase[{r.country.value_or(""), phases[i]}];
  }
  for (const auto& [u, n] : per_user) ++s.posts_per_user[n];
  s.total_posts = records.size();
  return s;
}

}  // namespace privlens::corpus
