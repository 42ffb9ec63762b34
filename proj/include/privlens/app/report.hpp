#pragma once

// Report tables with declared schemas, a schema validator and CSV / JSON
// emission.

#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include "json.hpp"
#include "privlens/corpus.hpp"
#include "privlens/util.hpp"

namespace privlens::app {

// Real: 6 decimals. Number: shortest round-trip form (thresholds).
enum class ColumnType { String, Integer, Real, Number, Fraction, Phase };

inline const char* column_type_name(ColumnType t) {
  switch (t) {
    case ColumnType::String: return "string";
    case ColumnType::Integer: return "integer";
    case ColumnType::Real: return "real";
    case ColumnType::Number: return "number";
    case ColumnType::Fraction: return "fraction";
    case ColumnType::Phase: return "phase";
  }
  return "?";
}

inline std::optional<ColumnType> parse_column_type(std::string_view s) {
  for (auto t : {ColumnType::String, ColumnType::Integer, ColumnType::Real, ColumnType::Number, ColumnType::Fraction,
                 ColumnType::Phase}) {
    if (s == column_type_name(t)) return t;
  }
  return std::nullopt;
}

struct Column {
  std::string name;
  ColumnType type = ColumnType::String;
};

using Schema = std::vector<Column>;

struct Table {
  std::string name;
  Schema schema;
  CsvTable data;

  // Starts an empty table whose header mirrors the schema.
  static Table make(std::string name, Schema schema) {
    Table t{std::move(name), std::move(schema), {}};
    for (const auto& c : t.schema) t.data.header.push_back(c.name);
    return t;
  }

  void add(std::vector<std::string> row) { data.rows.push_back(std::move(row)); }
};

// ---------------------------------------------------------------------------
// Table registry
// ---------------------------------------------------------------------------

// Schema of every table a run emits, in emission order.
inline const std::vector<std::pair<std::string, Schema>>& table_schemas() {
  using T = ColumnType;
  static const std::vector<std::pair<std::string, Schema>> s = {
      {"corpus_summary", {{"metric", T::String}, {"value", T::Integer}}},
      {"posts_per_phase", {{"country", T::String}, {"phase", T::Phase}, {"posts", T::Integer}, {"fraction", T::Fraction}}},
      {"posts_per_user", {{"posts", T::Integer}, {"users", T::Integer}}},
      {"hashtags_per_post", {{"hashtags", T::Integer}, {"posts", T::Integer}}},
      {"infection_rates",
       {{"country", T::String}, {"phase", T::Phase}, {"start", T::String}, {"end", T::String}, {"days", T::Integer},
        {"ir", T::Real}}},
      {"hashtag_clusters", {{"country", T::String}, {"phase", T::Phase}, {"cluster", T::String}, {"hashtags", T::Integer}}},
      {"hashtag_cluster_terms",
       {{"cluster_id", T::Integer}, {"label", T::String}, {"size", T::Integer}, {"top_terms", T::String}}},
      {"topics", {{"topic_id", T::Integer}, {"label", T::String}, {"posts", T::Integer}, {"top_words", T::String}}},
      {"sentiment",
       {{"topic", T::String}, {"phase", T::Phase}, {"positive", T::Fraction}, {"neutral", T::Fraction},
        {"negative", T::Fraction}}},
      {"risk_cdf", {{"topic", T::String}, {"phase", T::String}, {"risk", T::Fraction}, {"cdf", T::Fraction}}},
      {"risk_vs_n", {{"n", T::Integer}, {"users", T::Integer}, {"mean_risk", T::Fraction}}},
      {"risk_topics",
       {{"topic", T::String}, {"users", T::Integer}, {"mean_risk", T::Fraction}, {"identifiable", T::Integer},
        {"unique", T::Integer}, {"uniform", T::Integer}}},
      {"domain_categories", {{"country", T::String}, {"phase", T::Phase}, {"category", T::String}, {"shares", T::Integer}}},
      {"vtscores",
       {{"domain", T::String}, {"category", T::String}, {"score", T::Real}, {"reports", T::Integer}, {"tier", T::Integer}}},
      {"tier_table", {{"threshold", T::Number}, {"phase", T::Phase}, {"total", T::Integer}, {"unique", T::Integer}}},
      {"suspicious_categories",
       {{"country", T::String}, {"phase", T::Phase}, {"category", T::String}, {"fraction", T::Fraction}}},
  };
  return s;
}

inline const Schema& schema_of(const std::string& name) {
  for (const auto& [n, s] : table_schemas()) {
    if (n == name) return s;
  }
  throw Error("unknown table '" + name + "'");
}

inline Table make_table(const std::string& name) { return Table::make(name, schema_of(name)); }

// Every problem found, empty when the table conforms.
inline std::vector<std::string> validate_table(const Table& t) {
  std::vector<std::string> errs;
  std::vector<std::string> names;
  for (const auto& c : t.schema) names.push_back(c.name);
  if (t.data.header != names) errs.push_back(t.name + ": header does not match schema");
  for (std::size_t r = 0; r < t.data.rows.size(); ++r) {
    const auto& row = t.data.rows[r];
    const auto where = t.name + " row " + std::to_string(r + 1);
    if (row.size() != t.schema.size()) {
      errs.push_back(where + ": expected " + std::to_string(t.schema.size()) + " fields, got " +
                     std::to_string(row.size()));
      continue;
    }
    for (std::size_t c = 0; c < row.size(); ++c) {
      const auto& v = row[c];
      const auto& col = t.schema[c];
      bool ok = true;
      switch (col.type) {
        case ColumnType::String:
          ok = v.find('\n') == std::string::npos && v.find('\r') == std::string::npos;
          break;
        case ColumnType::Integer: {
          auto i = parse_int(v);
          ok = i && *i >= 0;
          break;
        }
        case ColumnType::Real:
        case ColumnType::Number: {
          auto d = parse_double(v);
          ok = d && std::isfinite(*d);
          break;
        }
        case ColumnType::Fraction: {
          auto d = parse_double(v);
          ok = d && *d >= 0.0 && *d <= 1.0;
          break;
        }
        case ColumnType::Phase:
          ok = corpus::parse_phase(v).has_value();
          break;
      }
      if (!ok) errs.push_back(where + ": column '" + col.name + "' is not a valid " + column_type_name(col.type) +
                              " ('" + v + "')");
    }
  }
  return errs;
}

struct ReportBundle {
  std::vector<Table> tables;           // emission order
  std::vector<std::string> traces;     // risk traces, one JSON object per line
  nlohmann::ordered_json metadata;
  std::vector<std::string> warnings;   // not emitted; for the console

  const Table* find(const std::string& name) const {
    for (const auto& t : tables) {
      if (t.name == name) return &t;
    }
    return nullptr;
  }

  std::vector<std::string> validate() const {
    std::vector<std::string> errs;
    for (const auto& t : tables) {
      auto e = validate_table(t);
      errs.insert(errs.end(), e.begin(), e.end());
    }
    return errs;
  }
};

// ---------------------------------------------------------------------------
// JSON form of a table
// ---------------------------------------------------------------------------

inline nlohmann::ordered_json table_to_json(const Table& t) {
  nlohmann::ordered_json j;
  j["table"] = t.name;
  auto cols = nlohmann::ordered_json::array();
  for (const auto& c : t.schema) cols.push_back({{"name", c.name}, {"type", column_type_name(c.type)}});
  j["columns"] = std::move(cols);
  auto rows = nlohmann::ordered_json::array();
  for (const auto& row : t.data.rows) {
    nlohmann::ordered_json o;
    for (std::size_t c = 0; c < t.schema.size() && c < row.size(); ++c) {
      const auto& col = t.schema[c];
      switch (col.type) {
        case ColumnType::Integer: o[col.name] = *parse_int(row[c]); break;
        case ColumnType::Real:
        case ColumnType::Number:
        case ColumnType::Fraction: o[col.name] = *parse_double(row[c]); break;
        default: o[col.name] = row[c];
      }
    }
    rows.push_back(std::move(o));
  }
  j["rows"] = std::move(rows);
  return j;
}

// Inverse of table_to_json; reals come back with the 6-decimal CSV format.
inline Table table_from_json(const nlohmann::json& j) {
  Table t;
  t.name = j.at("table").get<std::string>();
  for (const auto& c : j.at("columns")) {
    auto type = parse_column_type(c.at("type").get<std::string>());
    if (!type) throw Error("table " + t.name + ": unknown column type");
    t.schema.push_back({c.at("name").get<std::string>(), *type});
    t.data.header.push_back(t.schema.back().name);
  }
  for (const auto& o : j.at("rows")) {
    std::vector<std::string> row;
    for (const auto& col : t.schema) {
      const auto& v = o.at(col.name);
      switch (col.type) {
        case ColumnType::Integer: row.push_back(std::to_string(v.get<std::int64_t>())); break;
        case ColumnType::Real:
        case ColumnType::Fraction: row.push_back(fmt_fixed(v.get<double>())); break;
        case ColumnType::Number: row.push_back(fmt_shortest(v.get<double>())); break;
        default: row.push_back(v.get<std::string>());
      }
    }
    t.data.rows.push_back(std::move(row));
  }
  return t;
}

// ---------------------------------------------------------------------------
// Emission
// ---------------------------------------------------------------------------

// One file per table (<name>.csv or <name>.json), risk_traces.jsonl and
// run_metadata.json. Returns the written paths.
inline std::vector<std::filesystem::path> emit(const ReportBundle& b, const std::filesystem::path& dir,
                                               const std::string& format) {
  if (format != "csv" && format != "json") throw ConfigError("unknown output format '" + format + "'");
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec || !std::filesystem::is_directory(dir)) {
    throw Error("cannot create output directory '" + dir.string() + "'");
  }
  std::vector<std::filesystem::path> written;
  auto put = [&](const std::string& name, const std::string& content) {
    const auto p = dir / name;
    write_file(p.string(), content);
    written.push_back(p);
  };
  for (const auto& t : b.tables) {
    if (format == "csv") {
      put(t.name + ".csv", t.data.to_string());
    } else {
      put(t.name + ".json", table_to_json(t).dump(2) + "\n");
    }
  }
  std::string traces;
  for (const auto& line : b.traces) traces += line + "\n";
  put("risk_traces.jsonl", traces);
  put("run_metadata.json", b.metadata.dump(2) + "\n");
  return written;
}

}  // namespace privlens::app
