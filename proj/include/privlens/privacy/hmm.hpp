#pragma once

// Event-node HMM over post sequences. Each node stands for a group of
// similar posts (cosine similarity of tf-idf vectors >= tau_sim against the
// node's representative). Nodes carry:
//   - initial counts: how often the node opens a user sequence,
//   - transition counts to successor nodes,
//   - observation counts per user.

#include <algorithm>
#include <future>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "json.hpp"
#include "privlens/textmodel/tfidf.hpp"
#include "privlens/util.hpp"

namespace privlens::privacy {

using textmodel::SparseVector;
using NodeId = std::size_t;

inline constexpr double kDefaultSimilarity = 0.8;

struct EventNode {
  NodeId id = 0;
  std::string text;  // representative processed text
  SparseVector vector;
  std::int64_t initial = 0;
  std::map<std::string, std::int64_t> observers;  // user -> count(u|X)
  std::int64_t observation_total = 0;
  std::map<NodeId, std::int64_t> successors;  // next node -> count(next|X)
  std::int64_t successor_total = 0;
};

class PrivacyHmm {
 public:
  explicit PrivacyHmm(double tau_sim = kDefaultSimilarity, std::optional<std::size_t> cluster = std::nullopt)
      : tau_sim_(tau_sim), cluster_(cluster) {
    if (!(tau_sim >= 0.0 && tau_sim <= 1.0)) throw ConfigError("tau_sim must lie in [0,1]");
  }

  double tau_sim() const { return tau_sim_; }
  std::optional<std::size_t> cluster() const { return cluster_; }
  std::size_t size() const { return nodes_.size(); }
  bool empty() const { return nodes_.empty(); }
  const EventNode& node(NodeId id) const { return nodes_.at(id); }
  const std::vector<EventNode>& nodes() const { return nodes_; }
  std::int64_t initial_total() const { return initial_total_; }

  // Best node by cosine similarity (ties -> lowest id) if it reaches tau_sim.
  // A node whose representative text equals `text` always matches, which
  // keeps posts with empty vectors from spawning duplicate nodes.
  std::optional<NodeId> match_node(const SparseVector& vec, std::string_view text = {}) const {
    if (!text.empty() || vec.empty()) {
      if (auto it = by_text_.find(std::string(text)); it != by_text_.end()) return it->second;
    }
    if (vec.empty()) return std::nullopt;
    const double norm = std::sqrt(vec.squared_norm());
    std::unordered_map<NodeId, double> dots;
    for (const auto& [term, w] : vec.entries) {
      auto it = postings_.find(term);
      if (it == postings_.end()) continue;
      for (const auto& [n, nw] : it->second) dots[n] += w * nw;
    }
    std::optional<NodeId> best;
    double best_sim = -1.0;
    for (const auto& [n, d] : dots) {
      const double sim = d / (norm * node_norm_[n]);
      if (sim > best_sim || (sim == best_sim && n < *best)) {
        best_sim = sim;
        best = n;
      }
    }
    if (best && best_sim >= tau_sim_) return best;
    return std::nullopt;
  }

  NodeId add_node(std::string text, SparseVector vec) {
    const NodeId id = nodes_.size();
    EventNode n;
    n.id = id;
    n.text = std::move(text);
    n.vector = std::move(vec);
    index_node(n);
    nodes_.push_back(std::move(n));
    return id;
  }

  NodeId match_or_add(const std::string& text, const SparseVector& vec) {
    if (auto m = match_node(vec, text)) return *m;
    return add_node(text, vec);
  }

  // Counts one chronological sequence of `user`.
  void observe_sequence(const std::string& user, std::span<const NodeId> seq) {
    if (seq.empty()) return;
    for (auto id : seq) {
      if (id >= nodes_.size()) throw Error("observe_sequence: unknown node");
    }
    ++nodes_[seq[0]].initial;
    ++initial_total_;
    for (std::size_t i = 0; i < seq.size(); ++i) {
      auto& n = nodes_[seq[i]];
      ++n.observers[user];
      ++n.observation_total;
      if (i + 1 < seq.size()) {
        ++n.successors[seq[i + 1]];
        ++n.successor_total;
      }
    }
  }

  // --- raw counts -----------------------------------------------------------

  std::int64_t transition_count(NodeId from, NodeId to) const {
    const auto& s = nodes_.at(from).successors;
    auto it = s.find(to);
    return it == s.end() ? 0 : it->second;
  }

  std::int64_t observation_count(const std::string& user, NodeId n) const {
    const auto& o = nodes_.at(n).observers;
    auto it = o.find(user);
    return it == o.end() ? 0 : it->second;
  }

  // --- normalised probabilities --------------------------------------------

  double p_initial(NodeId n) const {
    if (initial_total_ == 0) return 0.0;
    return static_cast<double>(nodes_.at(n).initial) / static_cast<double>(initial_total_);
  }

  double p_transition(NodeId from, NodeId to) const {
    const auto& f = nodes_.at(from);
    if (f.successor_total == 0) return 0.0;
    return static_cast<double>(transition_count(from, to)) / static_cast<double>(f.successor_total);
  }

  double p_observation(const std::string& user, NodeId n) const {
    const auto& x = nodes_.at(n);
    if (x.observation_total == 0) return 0.0;
    return static_cast<double>(observation_count(user, n)) / static_cast<double>(x.observation_total);
  }

  // Copy without any observation by `user` (used for the PII-stripped
  // comparison). Transition and initial counts are left as they are.
  PrivacyHmm without_user_observations(const std::string& user) const {
    PrivacyHmm h = *this;
    for (auto& n : h.nodes_) {
      if (auto it = n.observers.find(user); it != n.observers.end()) {
        n.observation_total -= it->second;
        n.observers.erase(it);
      }
    }
    return h;
  }

  // Union of node sets keyed by representative text with count summation.
  // Node ids of the result follow representative-text order, so the merged
  // model does not depend on the order of `parts`.
  static PrivacyHmm merge(std::span<const PrivacyHmm> parts, double tau_sim) {
    std::map<std::string, EventNode> by_text;
    std::int64_t initial_total = 0;
    for (const auto& p : parts) {
      initial_total += p.initial_total_;
      for (const auto& n : p.nodes_) {
        auto [it, fresh] = by_text.try_emplace(n.text);
        auto& dst = it->second;
        if (fresh) {
          dst.text = n.text;
          dst.vector = n.vector;
        }
        dst.initial += n.initial;
        dst.observation_total += n.observation_total;
        for (const auto& [u, c] : n.observers) dst.observers[u] += c;
        dst.successor_total += n.successor_total;
      }
    }
    std::map<std::string, NodeId> new_id;
    NodeId next = 0;
    for (auto& [text, n] : by_text) {
      n.id = next;
      new_id[text] = next++;
    }
    for (const auto& p : parts) {
      for (const auto& n : p.nodes_) {
        auto& dst = by_text.at(n.text);
        for (const auto& [to, c] : n.successors) dst.successors[new_id.at(p.nodes_[to].text)] += c;
      }
    }
    PrivacyHmm out(tau_sim);
    out.initial_total_ = initial_total;
    for (auto& [text, n] : by_text) {
      out.index_node(n);
      out.nodes_.push_back(std::move(n));
    }
    return out;
  }

  // Versioned JSON dump. Vectors are not stored; they are recomputed from
  // the representative text against the vocabulary on load.
  nlohmann::ordered_json to_json() const {
    nlohmann::ordered_json j;
    j["tau_sim"] = tau_sim_;
    if (cluster_) j["cluster"] = *cluster_;
    j["initial_total"] = initial_total_;
    auto arr = nlohmann::ordered_json::array();
    for (const auto& n : nodes_) {
      nlohmann::ordered_json jn;
      jn["id"] = n.id;
      jn["text"] = n.text;
      jn["initial"] = n.initial;
      nlohmann::ordered_json obs = nlohmann::ordered_json::object();
      for (const auto& [u, c] : n.observers) obs[u] = c;
      jn["observations"] = obs;
      nlohmann::ordered_json tr = nlohmann::ordered_json::object();
      for (const auto& [to, c] : n.successors) tr[std::to_string(to)] = c;
      jn["transitions"] = tr;
      arr.push_back(std::move(jn));
    }
    j["nodes"] = std::move(arr);
    return j;
  }

  template <class VectorFn>
  static PrivacyHmm from_json(const nlohmann::json& j, VectorFn&& vectorize) {
    std::optional<std::size_t> cluster;
    if (j.contains("cluster")) cluster = j.at("cluster").get<std::size_t>();
    PrivacyHmm h(j.at("tau_sim").get<double>(), cluster);
    const auto& arr = j.at("nodes");
    for (std::size_t i = 0; i < arr.size(); ++i) {
      const auto& jn = arr[i];
      if (jn.at("id").get<std::size_t>() != i) throw Error("HMM dump: node ids must be dense and ordered");
      const auto text = jn.at("text").get<std::string>();
      h.add_node(text, vectorize(text));
    }
    std::int64_t initial_total = 0;
    for (std::size_t i = 0; i < arr.size(); ++i) {
      const auto& jn = arr[i];
      auto& n = h.nodes_[i];
      n.initial = jn.at("initial").get<std::int64_t>();
      initial_total += n.initial;
      for (auto it = jn.at("observations").begin(); it != jn.at("observations").end(); ++it) {
        const auto c = it.value().get<std::int64_t>();
        if (c < 1) throw Error("HMM dump: observation counts must be >= 1");
        n.observers[it.key()] = c;
        n.observation_total += c;
      }
      for (auto it = jn.at("transitions").begin(); it != jn.at("transitions").end(); ++it) {
        const auto to = parse_int(it.key());
        const auto c = it.value().get<std::int64_t>();
        if (!to || *to < 0 || static_cast<std::size_t>(*to) >= arr.size() || c < 1) {
          throw Error("HMM dump: bad transition entry");
        }
        n.successors[static_cast<NodeId>(*to)] = c;
        n.successor_total += c;
      }
    }
    if (initial_total != j.at("initial_total").get<std::int64_t>()) throw Error("HMM dump: initial_total mismatch");
    h.initial_total_ = initial_total;
    return h;
  }

 private:
  void index_node(const EventNode& n) {
    by_text_.emplace(n.text, n.id);
    const double norm = std::sqrt(n.vector.squared_norm());
    if (node_norm_.size() <= n.id) node_norm_.resize(n.id + 1, 0.0);
    node_norm_[n.id] = norm;
    if (norm == 0.0) return;
    for (const auto& [term, w] : n.vector.entries) postings_[term].emplace_back(n.id, w);
  }

  double tau_sim_;
  std::optional<std::size_t> cluster_;
  std::vector<EventNode> nodes_;
  std::int64_t initial_total_ = 0;
  std::unordered_map<std::string, NodeId> by_text_;
  std::unordered_map<std::uint32_t, std::vector<std::pair<NodeId, double>>> postings_;
  std::vector<double> node_norm_;
};

// ---------------------------------------------------------------------------
// Training
// ---------------------------------------------------------------------------

struct TrainPost {
  std::string user_id;
  Timestamp timestamp;
  std::size_t cluster = 0;
  std::string text;  // processed text, tokens joined by single spaces
  SparseVector vector;
  bool has_pii = false;
};

struct HmmBundle {
  std::vector<PrivacyHmm> clusters;
  PrivacyHmm merged;
  PrivacyHmm pii;
};

namespace detail {

// Posts of `indices` grouped per user in chronological order (stable for
// equal timestamps), users in lexicographic order.
inline std::map<std::string, std::vector<std::size_t>> user_sequences(std::span<const TrainPost> posts,
                                                                      std::span<const std::size_t> indices) {
  std::map<std::string, std::vector<std::size_t>> by_user;
  for (auto i : indices) by_user[posts[i].user_id].push_back(i);
  for (auto& [u, seq] : by_user) {
    std::stable_sort(seq.begin(), seq.end(),
                     [&](std::size_t a, std::size_t b) { return posts[a].timestamp < posts[b].timestamp; });
  }
  return by_user;
}

inline PrivacyHmm train_one(std::span<const TrainPost> posts, std::span<const std::size_t> indices, double tau_sim,
                            std::optional<std::size_t> cluster) {
  PrivacyHmm h(tau_sim, cluster);
  for (const auto& [user, seq] : user_sequences(posts, indices)) {
    std::vector<NodeId> ids;
    ids.reserve(seq.size());
    for (auto i : seq) ids.push_back(h.match_or_add(posts[i].text, posts[i].vector));
    h.observe_sequence(user, ids);
  }
  return h;
}

}  // namespace detail

// One HMM per cluster (trained concurrently when threads > 1; the result
// is identical either way), their merge, and the PII HMM over PII-bearing
// posts.
inline HmmBundle build_hmm(std::span<const TrainPost> posts, std::size_t num_clusters,
                           double tau_sim = kDefaultSimilarity, std::size_t threads = 1) {
  if (posts.empty()) throw Error("build_hmm: empty training set");
  if (num_clusters == 0) throw Error("build_hmm: need at least one cluster");
  std::vector<std::vector<std::size_t>> members(num_clusters);
  std::vector<std::size_t> pii_members;
  for (std::size_t i = 0; i < posts.size(); ++i) {
    if (posts[i].cluster >= num_clusters) throw Error("build_hmm: cluster id out of range");
    members[posts[i].cluster].push_back(i);
    if (posts[i].has_pii) pii_members.push_back(i);
  }
  HmmBundle out{{}, PrivacyHmm(tau_sim), PrivacyHmm(tau_sim)};
  if (threads <= 1) {
    for (std::size_t c = 0; c < num_clusters; ++c) out.clusters.push_back(detail::train_one(posts, members[c], tau_sim, c));
  } else {
    std::vector<std::future<PrivacyHmm>> jobs;
    for (std::size_t c = 0; c < num_clusters; ++c) {
      jobs.push_back(std::async(std::launch::async,
                                [&, c] { return detail::train_one(posts, members[c], tau_sim, c); }));
    }
    for (auto& j : jobs) out.clusters.push_back(j.get());
  }
  out.merged = PrivacyHmm::merge(out.clusters, tau_sim);
  out.pii = detail::train_one(posts, pii_members, tau_sim, std::nullopt);
  return out;
}

}  // namespace privlens::privacy
