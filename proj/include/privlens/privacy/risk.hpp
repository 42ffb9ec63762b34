#pragma once

// Privacy probability of a user's post sequence X_1..X_t:
//
//   P = prior(u) * [w_T p(X_1)] (1 - w_O p(u|X_1))
//                * prod_{x=2..t} [w_T p(X_x|X_{x-1})] (1 - w_O p(u|X_x))
//
// w_T = 1 / count(X_x|X_{x-1}) (for X_1: 1 / count of X_1 as sequence
// start), w_O = 1 / count(u|X_x). prior(u) is the minimum of the same
// product over paths of the PII HMM that touch a node observed by u.
// Risk is 1 - P.

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "privlens/privacy/hmm.hpp"

namespace privlens::privacy {

struct StepRecord {
  std::optional<NodeId> node;  // nullopt: post matched no node
  double w_t = 0.0;
  double p_transition = 0.0;
  double w_o = 0.0;
  double p_observation = 0.0;
  double factor = 0.0;
};

// Either the sequence start, or the node the previous post matched
// (nullopt when it matched none).
struct PrevStep {
  bool start = true;
  std::optional<NodeId> node;

  static PrevStep begin() { return {}; }
  static PrevStep after(std::optional<NodeId> n) { return {false, n}; }
};

// [w_T p(X_t|X_{t-1})] * [1 - w_O p(u|X_t)], with these conventions:
//   - node absent (unseen post): a fresh node seen once by this user, factor 0;
//   - transition never observed (or previous post unseen): transition part 0;
//   - user never observed at the node: observation part 1.
inline StepRecord step_factor(const PrivacyHmm& hmm, const std::string& user, PrevStep prev,
                              std::optional<NodeId> node) {
  StepRecord r;
  r.node = node;
  if (!node) {
    // Brand-new node observed once, by this user only.
    r.w_t = 0.0;
    r.p_transition = 0.0;
    r.w_o = 1.0;
    r.p_observation = 1.0;
    r.factor = 0.0;
    return r;
  }
  std::int64_t count = 0;
  if (prev.start) {
    count = hmm.node(*node).initial;
    r.p_transition = hmm.p_initial(*node);
  } else if (prev.node) {
    count = hmm.transition_count(*prev.node, *node);
    r.p_transition = hmm.p_transition(*prev.node, *node);
  }
  r.w_t = count > 0 ? 1.0 / static_cast<double>(count) : 0.0;
  const double transition_part = count > 0 ? r.w_t * r.p_transition : 0.0;

  const std::int64_t obs = hmm.observation_count(user, *node);
  double observation_part = 1.0;
  if (obs > 0) {
    r.w_o = 1.0 / static_cast<double>(obs);
    r.p_observation = hmm.p_observation(user, *node);
    observation_part = 1.0 - r.w_o * r.p_observation;
  }
  r.factor = transition_part * observation_part;
  return r;
}

struct PriorOptions {
  std::size_t max_path_length = 6;
  std::size_t max_paths = 100000;
};

struct LinkabilityPrior {
  double value = 1.0;
  std::size_t paths_evaluated = 0;  // qualifying paths
  bool truncated = false;           // a cap cut the enumeration short
};

// Minimum privacy product (without a prior of its own) over the simple paths
// of the PII HMM that start at a sequence-start node, follow observed
// transitions, have at most `max_path_length` nodes and visit at least one
// node where the user has an observation. 1 when the user observes no PII node.
inline LinkabilityPrior linkability_prior(const PrivacyHmm& pii, const std::string& user,
                                          const PriorOptions& opts = {}) {
  LinkabilityPrior out;
  bool user_present = false;
  for (const auto& n : pii.nodes()) {
    if (n.observers.count(user)) {
      user_present = true;
      break;
    }
  }
  if (!user_present || opts.max_path_length == 0) return out;

  std::vector<bool> on_path(pii.size(), false);
  std::size_t visited = 0;  // all paths walked, qualifying or not
  double best = std::numeric_limits<double>::infinity();

  auto dfs = [&](auto&& self, NodeId n, double product, std::size_t depth, bool touches) -> void {
    if (out.truncated) return;
    if (visited >= opts.max_paths) {
      out.truncated = true;
      return;
    }
    ++visited;
    if (touches) {
      ++out.paths_evaluated;
      best = std::min(best, product);
    }
    on_path[n] = true;
    if (depth == opts.max_path_length) {
      // Longer simple paths exist beyond the cap.
      for (const auto& [next, c] : pii.node(n).successors) {
        if (!on_path[next]) out.truncated = true;
      }
      on_path[n] = false;
      return;
    }
    for (const auto& [next, c] : pii.node(n).successors) {
      if (on_path[next]) continue;
      const auto step = step_factor(pii, user, PrevStep::after(n), next);
      self(self, next, product * step.factor, depth + 1, touches || pii.observation_count(user, next) > 0);
      if (out.truncated) break;
    }
    on_path[n] = false;
  };

  for (const auto& n : pii.nodes()) {
    if (n.initial == 0) continue;
    const auto first = step_factor(pii, user, PrevStep::begin(), n.id);
    dfs(dfs, n.id, first.factor, 1, pii.observation_count(user, n.id) > 0);
    if (out.truncated) break;
  }
  if (out.paths_evaluated > 0) out.value = best;
  return out;
}

struct RiskTrace {
  std::string user;
  std::vector<StepRecord> steps;
  LinkabilityPrior prior;
  double privacy_probability = 1.0;
  double risk = 0.0;

  nlohmann::ordered_json to_json() const {
    nlohmann::ordered_json j;
    j["user"] = user;
    j["linkability_prior"] = prior.value;
    j["prior_paths"] = prior.paths_evaluated;
    j["prior_truncated"] = prior.truncated;
    auto arr = nlohmann::ordered_json::array();
    for (const auto& s : steps) {
      nlohmann::ordered_json js;
      js["node"] = s.node ? nlohmann::ordered_json(*s.node) : nlohmann::ordered_json(nullptr);
      js["w_t"] = s.w_t;
      js["p_transition"] = s.p_transition;
      js["w_o"] = s.w_o;
      js["p_observation"] = s.p_observation;
      js["factor"] = s.factor;
      arr.push_back(std::move(js));
    }
    j["steps"] = std::move(arr);
    j["privacy_probability"] = privacy_probability;
    j["risk"] = risk;
    return j;
  }
};

// Scores a chronologically ordered sequence already matched to nodes
// (nullopt entries are posts that matched nothing).
// `prior` is the user's precomputed linkability prior.
inline RiskTrace sequence_privacy_nodes(const PrivacyHmm& hmm, const LinkabilityPrior& prior, const std::string& user,
                                        std::span<const std::optional<NodeId>> nodes) {
  RiskTrace t;
  t.user = user;
  if (nodes.empty()) return t;
  t.prior = prior;
  double p = t.prior.value;
  PrevStep prev = PrevStep::begin();
  for (const auto& n : nodes) {
    t.steps.push_back(step_factor(hmm, user, prev, n));
    p *= t.steps.back().factor;
    prev = PrevStep::after(n);
  }
  t.privacy_probability = p;
  t.risk = 1.0 - p;
  return t;
}

inline RiskTrace sequence_privacy_nodes(const PrivacyHmm& hmm, const PrivacyHmm& pii, const std::string& user,
                                        std::span<const std::optional<NodeId>> nodes,
                                        const PriorOptions& prior_opts = {}) {
  if (nodes.empty()) return sequence_privacy_nodes(hmm, LinkabilityPrior{}, user, nodes);
  return sequence_privacy_nodes(hmm, linkability_prior(pii, user, prior_opts), user, nodes);
}

// Matches every post vector against `hmm` (tau_sim of the model), then scores.
inline RiskTrace sequence_privacy(const PrivacyHmm& hmm, const PrivacyHmm& pii, const std::string& user,
                                  std::span<const SparseVector> posts, const PriorOptions& prior_opts = {}) {
  std::vector<std::optional<NodeId>> nodes;
  nodes.reserve(posts.size());
  for (const auto& v : posts) nodes.push_back(hmm.match_node(v));
  return sequence_privacy_nodes(hmm, pii, user, nodes, prior_opts);
}

// ---------------------------------------------------------------------------
// Train/test split
// ---------------------------------------------------------------------------

struct Split {
  std::vector<std::size_t> train;  // indices into the input
  std::vector<std::size_t> test;
};

// Per user, the earliest ceil(ratio * n) posts go to train and the rest to
// test. Equal timestamps are ordered by a seeded shuffle.
template <class Record>
Split split_train_test(std::span<const Record> records, double ratio, std::uint64_t seed) {
  if (!(ratio > 0.0 && ratio < 1.0)) throw ConfigError("split ratio must lie in (0,1)");
  std::map<std::string, std::vector<std::size_t>> by_user;
  for (std::size_t i = 0; i < records.size(); ++i) by_user[records[i].user_id].push_back(i);
  Rng rng(seed);
  Split s;
  for (auto& [u, idx] : by_user) {
    std::vector<std::uint64_t> tiebreak(idx.size());
    for (auto& t : tiebreak) t = rng.next();
    std::vector<std::size_t> order(idx.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      const auto& ra = records[idx[a]];
      const auto& rb = records[idx[b]];
      if (ra.timestamp != rb.timestamp) return ra.timestamp < rb.timestamp;
      return tiebreak[a] < tiebreak[b];
    });
    const auto n = idx.size();
    auto n_train = static_cast<std::size_t>(std::ceil(ratio * static_cast<double>(n) - 1e-9));
    n_train = std::clamp<std::size_t>(n_train, 1, n);
    for (std::size_t i = 0; i < n; ++i) (i < n_train ? s.train : s.test).push_back(idx[order[i]]);
  }
  std::sort(s.train.begin(), s.train.end());
  std::sort(s.test.begin(), s.test.end());
  return s;
}

}  // namespace privlens::privacy
