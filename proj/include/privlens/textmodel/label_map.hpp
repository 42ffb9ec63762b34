#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "privlens/util.hpp"

namespace privlens::textmodel {

// Cluster/topic id -> human label, with merge groups that fold several ids
// into one label.
//
// JSON form:
//   {"labels": {"0": "masks", "1": "lockdown", ...},
//    "merges": [{"ids": [3, 7], "label": "vaccines"}]}
class LabelMap {
 public:
  LabelMap() = default;

  static LabelMap identity(std::size_t n) {
    LabelMap m;
    for (std::size_t i = 0; i < n; ++i) m.labels_[i] = std::to_string(i);
    return m;
  }

  static LabelMap from_json(const nlohmann::json& j) {
    LabelMap m;
    if (j.contains("labels")) {
      for (auto it = j.at("labels").begin(); it != j.at("labels").end(); ++it) {
        auto id = parse_int(it.key());
        if (!id || *id < 0) throw ConfigError("label map: bad id '" + it.key() + "'");
        m.labels_[static_cast<std::size_t>(*id)] = it.value().get<std::string>();
      }
    }
    if (j.contains("merges")) {
      for (const auto& g : j.at("merges")) {
        Merge merge;
        merge.label = g.at("label").get<std::string>();
        for (const auto& id : g.at("ids")) merge.ids.insert(id.get<std::size_t>());
        m.merges_.push_back(std::move(merge));
      }
    }
    m.validate();
    return m;
  }

  static LabelMap load(const std::string& path) {
    const auto j = nlohmann::json::parse(read_file(path), nullptr, false);
    if (j.is_discarded()) throw ConfigError("label map '" + path + "' is not valid JSON");
    return from_json(j);
  }

  void add_label(std::size_t id, std::string label) {
    labels_[id] = std::move(label);
    validate();
  }

  void add_merge(std::set<std::size_t> ids, std::string label) {
    merges_.push_back({std::move(ids), std::move(label)});
    validate();
  }

  std::optional<std::string> label_of(std::size_t id) const {
    for (const auto& g : merges_) {
      if (g.ids.count(id)) return g.label;
    }
    if (auto it = labels_.find(id); it != labels_.end()) return it->second;
    return std::nullopt;
  }

  // Ids in [0, n) without a label; empty when the map covers them all.
  std::vector<std::size_t> missing(std::size_t n) const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < n; ++i) {
      if (!label_of(i)) out.push_back(i);
    }
    return out;
  }

  // Distinct labels over ids [0, n) after merging.
  std::set<std::string> distinct_labels(std::size_t n) const {
    std::set<std::string> s;
    for (std::size_t i = 0; i < n; ++i) {
      if (auto l = label_of(i)) s.insert(*l);
    }
    return s;
  }

  nlohmann::ordered_json to_json() const {
    nlohmann::ordered_json j;
    nlohmann::ordered_json labels = nlohmann::ordered_json::object();
    for (const auto& [id, l] : labels_) labels[std::to_string(id)] = l;
    j["labels"] = labels;
    nlohmann::ordered_json merges = nlohmann::ordered_json::array();
    for (const auto& g : merges_) merges.push_back({{"ids", g.ids}, {"label", g.label}});
    j["merges"] = merges;
    return j;
  }

 private:
  struct Merge {
    std::set<std::size_t> ids;
    std::string label;
  };

  // Every id is labelled at most once: one merge group, or a plain label,
  // never both.
  void validate() const {
    std::set<std::size_t> in_merge;
    for (const auto& g : merges_) {
      for (auto id : g.ids) {
        if (!in_merge.insert(id).second) {
          throw ConfigError("label map: id " + std::to_string(id) + " appears in two merge groups");
        }
        if (auto it = labels_.find(id); it != labels_.end() && it->second != g.label) {
          throw ConfigError("label map: id " + std::to_string(id) + " has a plain label and a merge label");
        }
      }
    }
  }

  std::map<std::size_t, std::string> labels_;
  std::vector<Merge> merges_;
};

struct LabelledAssignments {
  std::vector<std::string> labels;                 // per input assignment
  std::map<std::string, std::size_t> label_counts;  // merged counts
};

// `num_ids` is the id universe the map must cover (e.g. k or K).
inline LabelledAssignments apply_label_map(std::span<const std::size_t> assignments, const LabelMap& map,
                                           std::size_t num_ids) {
  auto missing = map.missing(num_ids);
  for (auto a : assignments) {
    if (a >= num_ids && !map.label_of(a)) missing.push_back(a);
  }
  if (!missing.empty()) {
    std::sort(missing.begin(), missing.end());
    missing.erase(std::unique(missing.begin(), missing.end()), missing.end());
    std::string ids;
    for (auto id : missing) ids += (ids.empty() ? "" : ", ") + std::to_string(id);
    throw ConfigError("label map does not cover ids: " + ids);
  }
  LabelledAssignments out;
  out.labels.reserve(assignments.size());
  for (auto a : assignments) {
    auto l = *map.label_of(a);
    ++out.label_counts[l];
    out.labels.push_back(std::move(l));
  }
  return out;
}

}  // namespace privlens::textmodel
