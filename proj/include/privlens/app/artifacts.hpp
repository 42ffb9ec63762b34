#pragma once

// Intermediate artefacts shared between CLI stages: the filtered posts,
// per-post phase and topic labels, the privacy model and the domain
// dossiers. All live in the output directory.

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "json.hpp"
#include "privlens/app/pipeline.hpp"

namespace privlens::app::artifacts {

inline const char* kPosts = "posts.jsonl";
inline const char* kPeriods = "post_periods.csv";
inline const char* kTopics = "post_topics.csv";
inline const char* kPrivacyModel = "privacy_model.json";
inline const char* kDomains = "domains.csv";

inline fs::path require(const fs::path& dir, const char* name, const char* producer) {
  const auto p = dir / name;
  if (!fs::is_regular_file(p)) {
    throw Error("missing " + p.string() + "; run `privlens " + producer + "` first");
  }
  return p;
}

inline void write_posts(const fs::path& dir, std::span<const PostRecord> records) {
  fs::create_directories(dir);
  write_file((dir / kPosts).string(), corpus::to_jsonl(records));
}

inline std::vector<PostRecord> read_posts(const fs::path& dir) {
  return corpus::load_corpus(require(dir, kPosts, "ingest").string()).records;
}

namespace detail {

// Rows of a post-keyed CSV, aligned with `records`.
inline std::vector<std::vector<std::string>> aligned_rows(const fs::path& path, std::span<const PostRecord> records,
                                                          const std::vector<std::string>& header) {
  const auto t = load_csv(path.string());
  require_header(t, header, path.filename().string());
  std::map<std::string, const std::vector<std::string>*> by_id;
  for (const auto& row : t.rows) by_id[row[0]] = &row;
  std::vector<std::vector<std::string>> out;
  out.reserve(records.size());
  for (const auto& r : records) {
    auto it = by_id.find(r.post_id);
    if (it == by_id.end()) throw Error(path.string() + " has no row for post " + r.post_id);
    out.push_back(*it->second);
  }
  return out;
}

}  // namespace detail

inline void write_periods(const fs::path& dir, std::span<const PostRecord> records, std::span<const Phase> phases) {
  CsvTable t;
  t.header = {"post_id", "phase"};
  for (std::size_t i = 0; i < records.size(); ++i) t.rows.push_back({records[i].post_id, corpus::phase_name(phases[i])});
  write_file((dir / kPeriods).string(), t.to_string());
}

inline std::vector<Phase> read_periods(const fs::path& dir, std::span<const PostRecord> records) {
  std::vector<Phase> out;
  for (const auto& row : detail::aligned_rows(require(dir, kPeriods, "periods"), records, {"post_id", "phase"})) {
    auto p = corpus::parse_phase(row[1]);
    if (!p) throw Error(std::string(kPeriods) + ": bad phase '" + row[1] + "'");
    out.push_back(*p);
  }
  return out;
}

inline void write_topics(const fs::path& dir, std::span<const PostRecord> records, const TopicResult& topics) {
  CsvTable t;
  t.header = {"post_id", "topic_id", "topic"};
  for (std::size_t i = 0; i < records.size(); ++i) {
    t.rows.push_back({records[i].post_id, std::to_string(topics.topic_ids[i]), topics.labels[i]});
  }
  write_file((dir / kTopics).string(), t.to_string());
}

// Restores per-post labels; the label set is the labels that occur.
inline TopicResult read_topics(const fs::path& dir, std::span<const PostRecord> records) {
  TopicResult r;
  std::set<std::string> distinct;
  for (const auto& row :
       detail::aligned_rows(require(dir, kTopics, "topics"), records, {"post_id", "topic_id", "topic"})) {
    auto id = parse_int(row[1]);
    if (!id || *id < 0) throw Error(std::string(kTopics) + ": bad topic id '" + row[1] + "'");
    r.topic_ids.push_back(static_cast<std::size_t>(*id));
    r.labels.push_back(row[2]);
    distinct.insert(row[2]);
  }
  r.label_set.assign(distinct.begin(), distinct.end());
  return r;
}

inline void write_privacy_model(const fs::path& dir, const PrivacyModel& m) {
  write_file((dir / kPrivacyModel).string(), m.to_json().dump() + "\n");
}

inline PrivacyModel read_privacy_model(const fs::path& dir) {
  return PrivacyModel::from_json(
      nlohmann::json::parse(read_file(require(dir, kPrivacyModel, "privacy train").string())));
}

inline void write_domains(const fs::path& dir, std::span<const urlsec::DomainDossier> dossiers) {
  CsvTable t;
  t.header = {"domain", "category", "country", "phase", "shares"};
  for (const auto& d : dossiers) {
    for (const auto& [key, n] : d.shares) {
      t.rows.push_back({d.domain, d.category, key.first, corpus::phase_name(key.second), std::to_string(n)});
    }
  }
  write_file((dir / kDomains).string(), t.to_string());
}

inline std::vector<urlsec::DomainDossier> read_domains(const fs::path& dir) {
  const auto t = load_csv(require(dir, kDomains, "urls").string());
  require_header(t, {"domain", "category", "country", "phase", "shares"}, kDomains);
  std::map<std::string, urlsec::DomainDossier> by_domain;
  for (const auto& row : t.rows) {
    auto phase = corpus::parse_phase(row[3]);
    auto n = parse_int(row[4]);
    if (!phase || !n || *n < 0) throw Error(std::string(kDomains) + ": bad row for " + row[0]);
    auto& d = by_domain[row[0]];
    d.domain = row[0];
    d.category = row[1];
    d.shares[{row[2], *phase}] += static_cast<std::size_t>(*n);
  }
  std::vector<urlsec::DomainDossier> out;
  for (auto& [k, d] : by_domain) out.push_back(std::move(d));
  return out;
}

// Loads every known table present in `dir` (CSV or JSON form).
inline std::vector<Table> read_tables(const fs::path& dir) {
  std::vector<Table> out;
  for (const auto& [name, schema] : table_schemas()) {
    const auto csv = dir / (name + ".csv");
    const auto json = dir / (name + ".json");
    if (fs::is_regular_file(csv)) {
      Table t{name, schema, load_csv(csv.string())};
      out.push_back(std::move(t));
    } else if (fs::is_regular_file(json)) {
      out.push_back(table_from_json(nlohmann::json::parse(read_file(json.string()))));
    }
  }
  return out;
}

}  // namespace privlens::app::artifacts
