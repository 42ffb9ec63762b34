#pragma once

// Pipeline configuration: a JSON file whose relative paths resolve against
// the file's own directory. validate_config() reports every violation at
// once.

#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "json.hpp"
#include "privlens/corpus.hpp"
#include "privlens/util.hpp"

namespace privlens::app {

namespace fs = std::filesystem;

class ConfigErrors : public ConfigError {
 public:
  explicit ConfigErrors(std::vector<std::string> violations)
      : ConfigError(join(violations)), violations_(std::move(violations)) {}

  const std::vector<std::string>& violations() const { return violations_; }

 private:
  static std::string join(const std::vector<std::string>& v) {
    std::string s = "invalid configuration:";
    for (const auto& e : v) s += "\n  - " + e;
    return s;
  }
  std::vector<std::string> violations_;
};

struct PipelineConfig {
  fs::path config_path;

  // inputs
  fs::path corpus;
  std::optional<fs::path> schema_map;
  std::optional<Date> span_start;
  std::optional<Date> span_end;
  std::vector<std::string> countries;
  std::string language = "en";
  fs::path windows;
  std::optional<fs::path> case_series;
  std::optional<fs::path> stopwords;  // built-in English list when absent
  std::optional<fs::path> lemmas;
  fs::path lexicon;
  fs::path names_gazetteer;
  fs::path locations_gazetteer;
  fs::path organisations_gazetteer;
  fs::path category_map;
  fs::path public_suffix_list;
  std::optional<fs::path> report_cache;
  std::optional<fs::path> hashtag_labels;
  std::optional<fs::path> topic_labels;

  // hashtag clustering
  std::size_t hashtag_k = 15;
  std::uint64_t hashtag_seed = 1;
  std::size_t kmeans_max_iter = 300;

  // topics
  std::size_t topic_k = 15;
  std::optional<double> lda_alpha;
  double lda_beta = 0.01;
  std::size_t lda_iterations = 200;
  std::uint64_t topic_seed = 1;

  // sentiment
  double sentiment_threshold = 0.05;

  // privacy
  double tau_sim = 0.8;
  double split_ratio = 0.8;
  std::uint64_t split_seed = 1;
  std::size_t max_path_length = 6;
  std::size_t max_paths = 100000;
  std::size_t max_posts = 40;

  // urls
  std::vector<double> thresholds = {3, 10, 20, 40, 55};
  bool positive_reports_only = false;
  Date report_window_start{2020, 1, 1};
  Date report_window_end{2021, 11, 6};
  bool live_scanner = false;
  double requests_per_minute = 4.0;
  double suspicious_min_score = 3.0;

  // output
  fs::path output_dir = "out";
  std::string format = "csv";
  bool offline = true;
};

namespace detail {

class Reader {
 public:
  Reader(const nlohmann::json& root, fs::path base, std::vector<std::string>& errors)
      : root_(root), base_(std::move(base)), errors_(errors) {}

  const nlohmann::json* at(const std::string& dotted) const {
    const nlohmann::json* cur = &root_;
    for (const auto& part : split(dotted, '.')) {
      if (!cur->is_object() || !cur->contains(part)) return nullptr;
      cur = &(*cur)[part];
    }
    return cur->is_null() ? nullptr : cur;
  }

  std::optional<fs::path> path(const std::string& key, bool required) {
    const auto* v = at(key);
    if (!v) {
      if (required) errors_.push_back(key + ": required");
      return std::nullopt;
    }
    if (!v->is_string()) {
      errors_.push_back(key + ": expected a file path string");
      return std::nullopt;
    }
    fs::path p = v->get<std::string>();
    if (p.is_relative()) p = base_ / p;
    p = p.lexically_normal();
    if (!fs::is_regular_file(p)) errors_.push_back(key + ": missing file '" + p.string() + "'");
    return p;
  }

  template <class T>
  void number(const std::string& key, T& out, double lo, double hi, const std::string& range_text) {
    const auto* v = at(key);
    if (!v) return;
    if (!v->is_number()) {
      errors_.push_back(key + ": expected a number");
      return;
    }
    const double d = v->get<double>();
    if constexpr (std::is_integral_v<T>) {
      if (!v->is_number_integer()) {
        errors_.push_back(key + ": expected an integer");
        return;
      }
    }
    if (!(d >= lo && d <= hi)) {
      errors_.push_back(key + ": " + range_text + " (got " + v->dump() + ")");
      return;
    }
    out = static_cast<T>(d);
  }

  void string(const std::string& key, std::string& out, const std::set<std::string>& allowed = {}) {
    const auto* v = at(key);
    if (!v) return;
    if (!v->is_string()) {
      errors_.push_back(key + ": expected a string");
      return;
    }
    auto s = v->get<std::string>();
    if (!allowed.empty() && !allowed.count(s)) {
      std::string opts;
      for (const auto& a : allowed) opts += (opts.empty() ? "" : ", ") + a;
      errors_.push_back(key + ": must be one of {" + opts + "}");
      return;
    }
    out = std::move(s);
  }

  void boolean(const std::string& key, bool& out) {
    const auto* v = at(key);
    if (!v) return;
    if (!v->is_boolean()) {
      errors_.push_back(key + ": expected true or false");
      return;
    }
    out = v->get<bool>();
  }

  std::optional<Date> date(const std::string& key) {
    const auto* v = at(key);
    if (!v) return std::nullopt;
    std::optional<Date> d;
    if (v->is_string()) d = Date::parse(v->get<std::string>());
    if (!d) errors_.push_back(key + ": expected an ISO date YYYY-MM-DD");
    return d;
  }

  // Rejects keys outside `known` (dotted prefixes for nested objects).
  void check_keys(const nlohmann::json& obj, const std::string& prefix, const std::set<std::string>& known) {
    if (!obj.is_object()) return;
    for (const auto& [k, v] : obj.items()) {
      const auto key = prefix.empty() ? k : prefix + "." + k;
      if (!known.count(key)) errors_.push_back(key + ": unknown key");
    }
  }

  const nlohmann::json& root() const { return root_; }

 private:
  const nlohmann::json& root_;
  fs::path base_;
  std::vector<std::string>& errors_;
};

}  // namespace detail

// Resolves and checks a parsed configuration; `base` anchors relative paths.
inline PipelineConfig resolve_config(const nlohmann::json& j, const fs::path& base) {
  std::vector<std::string> errors;
  PipelineConfig c;
  if (!j.is_object()) throw ConfigErrors({"configuration must be a JSON object"});
  detail::Reader r(j, base, errors);

  static const std::map<std::string, std::set<std::string>> sections = {
      {"span", {"start", "end"}},
      {"gazetteers", {"names", "locations", "organisations"}},
      {"hashtags", {"k", "seed", "max_iter", "labels"}},
      {"topics", {"k", "alpha", "beta", "iterations", "seed", "labels"}},
      {"sentiment", {"threshold"}},
      {"privacy", {"tau_sim", "split_ratio", "seed", "max_path_length", "max_paths", "max_posts"}},
      {"urls",
       {"thresholds", "denominator", "window", "scanner", "requests_per_minute", "suspicious_min_score",
        "category_map", "public_suffix_list", "report_cache"}},
      {"output", {"dir", "format"}},
  };
  std::set<std::string> top = {"corpus", "schema_map", "countries", "language", "windows", "case_series",
                               "stopwords", "lemmas", "lexicon", "offline"};
  for (const auto& [s, keys] : sections) top.insert(s);
  r.check_keys(j, "", top);
  for (const auto& [s, keys] : sections) {
    if (!j.contains(s)) continue;
    if (!j[s].is_object()) {
      errors.push_back(s + ": expected an object");
      continue;
    }
    std::set<std::string> dotted;
    for (const auto& k : keys) dotted.insert(s + "." + k);
    r.check_keys(j[s], s, dotted);
  }

  auto req = [&](const std::string& key, fs::path& out) {
    if (auto p = r.path(key, true)) out = *p;
  };
  req("corpus", c.corpus);
  c.schema_map = r.path("schema_map", false);
  c.span_start = r.date("span.start");
  c.span_end = r.date("span.end");
  if (c.span_start && c.span_end && *c.span_end < *c.span_start) errors.push_back("span: end precedes start");

  if (const auto* v = r.at("countries")) {
    if (!v->is_array() || v->empty()) {
      errors.push_back("countries: expected a non-empty list of country names");
    } else {
      for (const auto& e : *v) {
        if (e.is_string() && !e.get<std::string>().empty()) {
          c.countries.push_back(e.get<std::string>());
        } else {
          errors.push_back("countries: every entry must be a non-empty string");
          break;
        }
      }
    }
  } else {
    errors.push_back("countries: required");
  }
  r.string("language", c.language);

  req("windows", c.windows);
  c.case_series = r.path("case_series", false);
  c.stopwords = r.path("stopwords", false);
  c.lemmas = r.path("lemmas", false);
  req("lexicon", c.lexicon);
  req("gazetteers.names", c.names_gazetteer);
  req("gazetteers.locations", c.locations_gazetteer);
  req("gazetteers.organisations", c.organisations_gazetteer);
  req("urls.category_map", c.category_map);
  req("urls.public_suffix_list", c.public_suffix_list);
  if (r.at("urls.report_cache")) {
    // The cache may not exist yet: live runs create it.
    const auto* v = r.at("urls.report_cache");
    if (v->is_string()) {
      fs::path p = v->get<std::string>();
      c.report_cache = (p.is_relative() ? base / p : p).lexically_normal();
    } else {
      errors.push_back("urls.report_cache: expected a file path string");
    }
  }
  c.hashtag_labels = r.path("hashtags.labels", false);
  c.topic_labels = r.path("topics.labels", false);

  r.number("hashtags.k", c.hashtag_k, 1, 1000, "k must lie in [1,1000]");
  r.number("hashtags.seed", c.hashtag_seed, 0, 9007199254740991.0, "seed must be a non-negative integer");
  r.number("hashtags.max_iter", c.kmeans_max_iter, 1, 100000, "max_iter must lie in [1,100000]");
  r.number("topics.k", c.topic_k, 1, 1000, "K must lie in [1,1000]");
  if (const auto* v = r.at("topics.alpha")) {
    if (!v->is_number() || !(v->get<double>() > 0.0)) {
      errors.push_back("topics.alpha: alpha must be positive");
    } else {
      c.lda_alpha = v->get<double>();
    }
  }
  r.number("topics.beta", c.lda_beta, 1e-12, 1e6, "beta must be positive");
  r.number("topics.iterations", c.lda_iterations, 1, 100000, "iterations must lie in [1,100000]");
  r.number("topics.seed", c.topic_seed, 0, 9007199254740991.0, "seed must be a non-negative integer");
  r.number("sentiment.threshold", c.sentiment_threshold, 0.0, 1.0, "τ ∈ [0,1]");
  r.number("privacy.tau_sim", c.tau_sim, 0.0, 1.0, "τ_sim ∈ [0,1]");
  if (const auto* v = r.at("privacy.split_ratio")) {
    if (!v->is_number() || !(v->get<double>() > 0.0 && v->get<double>() < 1.0)) {
      errors.push_back("privacy.split_ratio: split ratio ∈ (0,1) (got " + v->dump() + ")");
    } else {
      c.split_ratio = v->get<double>();
    }
  }
  r.number("privacy.seed", c.split_seed, 0, 9007199254740991.0, "seed must be a non-negative integer");
  r.number("privacy.max_path_length", c.max_path_length, 1, 64, "max_path_length must lie in [1,64]");
  r.number("privacy.max_paths", c.max_paths, 1, 1e9, "max_paths must lie in [1,1e9]");
  r.number("privacy.max_posts", c.max_posts, 1, 100000, "max_posts must lie in [1,100000]");

  if (const auto* v = r.at("urls.thresholds")) {
    if (!v->is_array() || v->empty()) {
      errors.push_back("urls.thresholds: expected a non-empty list of numbers");
    } else {
      c.thresholds.clear();
      for (const auto& t : *v) {
        if (!t.is_number() || t.get<double>() < 0.0) {
          errors.push_back("urls.thresholds: thresholds must be non-negative numbers");
          break;
        }
        c.thresholds.push_back(t.get<double>());
      }
    }
  }
  std::string denominator = "all";
  r.string("urls.denominator", denominator, {"all", "positive"});
  c.positive_reports_only = denominator == "positive";
  if (auto d = r.date("urls.window.start")) c.report_window_start = *d;
  if (auto d = r.date("urls.window.end")) c.report_window_end = *d;
  if (c.report_window_end < c.report_window_start) errors.push_back("urls.window: end precedes start");
  std::string scanner = "offline";
  r.string("urls.scanner", scanner, {"offline", "live"});
  c.live_scanner = scanner == "live";
  r.number("urls.requests_per_minute", c.requests_per_minute, 1e-6, 1e6, "requests_per_minute must be positive");
  r.number("urls.suspicious_min_score", c.suspicious_min_score, 0.0, 1e6, "suspicious_min_score must be >= 0");

  std::string out_dir;
  r.string("output.dir", out_dir);
  if (!out_dir.empty()) c.output_dir = fs::path(out_dir).is_relative() ? base / out_dir : fs::path(out_dir);
  else c.output_dir = base / "out";
  c.output_dir = c.output_dir.lexically_normal();
  r.string("output.format", c.format, {"csv", "json"});
  r.boolean("offline", c.offline);

  if (c.live_scanner && !c.report_cache) errors.push_back("urls.report_cache: required when urls.scanner is \"live\"");

  // Cross-file checks only once the files themselves are present.
  if (!c.windows.empty() && fs::is_regular_file(c.windows)) {
    try {
      corpus::load_windows(c.windows.string());
    } catch (const Error& e) {
      errors.push_back(std::string("windows: ") + e.what());
    }
  }
  if (c.schema_map && fs::is_regular_file(*c.schema_map)) {
    try {
      corpus::SchemaMap::from_json(nlohmann::json::parse(read_file(c.schema_map->string())));
    } catch (const std::exception& e) {
      errors.push_back(std::string("schema_map: ") + e.what());
    }
  }

  if (!errors.empty()) throw ConfigErrors(std::move(errors));
  return c;
}

inline PipelineConfig validate_config(const fs::path& path) {
  std::string text;
  try {
    text = read_file(path.string());
  } catch (const Error& e) {
    throw ConfigErrors({e.what()});
  }
  const auto j = nlohmann::json::parse(text, nullptr, false);
  if (j.is_discarded()) throw ConfigErrors({"'" + path.string() + "' is not valid JSON"});
  auto c = resolve_config(j, path.parent_path().empty() ? fs::path(".") : path.parent_path());
  c.config_path = path;
  return c;
}

}  // namespace privlens::app
