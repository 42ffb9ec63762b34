#pragma once

// Cohort-level summaries of per-user risk: risk CDFs per topic and phase,
// mean risk after the first n posts, and per-topic counts of identifiable,
// unique and uniform sequences.

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "privlens/privacy/risk.hpp"
#include "privlens/util.hpp"

namespace privlens::privacy {

struct TestPost {
  std::string topic;
  std::string phase;            // empty: outside every lockdown phase
  std::optional<NodeId> node;  // match in the merged HMM
};

struct TestUser {
  std::string user;
  std::vector<TestPost> posts;  // chronological
};

struct CohortOptions {
  std::size_t max_posts = 40;
  PriorOptions prior;
};

struct CdfRow {
  std::string topic;
  std::string phase;  // "All" aggregates phases
  double risk = 0.0;
  double cdf = 0.0;  // fraction of users with risk <= `risk`
};

struct RiskAtN {
  std::size_t n = 0;
  std::size_t users = 0;
  double mean_risk = 0.0;
};

struct TopicBreakdown {
  std::string topic;
  std::size_t users = 0;
  double mean_risk = 0.0;
  std::size_t identifiable = 0;  // privacy probability exactly 0
  std::size_t unique = 0;        // some step has a zero transition part
  std::size_t uniform = 0;       // some step has a zero observation part
};

struct CohortReport {
  std::vector<CdfRow> cdf;
  std::vector<RiskAtN> risk_vs_n;
  std::vector<TopicBreakdown> breakdown;
  std::vector<RiskTrace> traces;  // whole test sequence, one per user
};

inline double transition_part(const StepRecord& s) { return s.node && s.w_t > 0.0 ? s.w_t * s.p_transition : 0.0; }

inline double observation_part(const StepRecord& s) {
  if (!s.node) return 0.0;
  return s.w_o > 0.0 ? 1.0 - s.w_o * s.p_observation : 1.0;
}

// Step sequence of a trace classified by the zero-factor conventions.
inline bool is_unique(const RiskTrace& t) {
  return std::any_of(t.steps.begin(), t.steps.end(), [](const auto& s) { return transition_part(s) == 0.0; });
}

inline bool is_uniform(const RiskTrace& t) {
  return std::any_of(t.steps.begin(), t.steps.end(), [](const auto& s) { return observation_part(s) == 0.0; });
}

namespace detail {

inline void append_cdf(std::vector<CdfRow>& out, const std::string& topic, const std::string& phase,
                       std::vector<double> risks) {
  if (risks.empty()) return;
  std::sort(risks.begin(), risks.end());
  const double n = static_cast<double>(risks.size());
  for (std::size_t i = 0; i < risks.size(); ++i) {
    if (i + 1 < risks.size() && risks[i + 1] == risks[i]) continue;
    out.push_back({topic, phase, risks[i], static_cast<double>(i + 1) / n});
  }
}

}  // namespace detail

inline CohortReport cohort_report(const PrivacyHmm& hmm, const PrivacyHmm& pii, std::span<const TestUser> users,
                                  const CohortOptions& opts = {}) {
  CohortReport rep;
  std::map<std::string, LinkabilityPrior> priors;
  for (const auto& u : users) {
    if (!u.posts.empty()) priors.emplace(u.user, linkability_prior(pii, u.user, opts.prior));
  }

  // Whole-sequence traces and mean risk after n posts.
  std::vector<double> sum(opts.max_posts + 1, 0.0);
  std::vector<std::size_t> count(opts.max_posts + 1, 0);
  for (const auto& u : users) {
    if (u.posts.empty()) continue;
    std::vector<std::optional<NodeId>> nodes;
    for (const auto& p : u.posts) nodes.push_back(p.node);
    auto trace = sequence_privacy_nodes(hmm, priors.at(u.user), u.user, nodes);
    double p = trace.prior.value;
    for (std::size_t i = 0; i < trace.steps.size() && i < opts.max_posts; ++i) {
      p *= trace.steps[i].factor;
      sum[i + 1] += 1.0 - p;
      ++count[i + 1];
    }
    rep.traces.push_back(std::move(trace));
  }
  for (std::size_t n = 1; n <= opts.max_posts; ++n) {
    if (count[n] == 0) continue;
    rep.risk_vs_n.push_back({n, count[n], sum[n] / static_cast<double>(count[n])});
  }

  // Per-topic (and per-topic-per-phase) sequences.
  std::map<std::pair<std::string, std::string>, std::vector<double>> group_risks;
  std::map<std::string, TopicBreakdown> breakdown;
  for (const auto& u : users) {
    std::set<std::string> topics;
    for (const auto& p : u.posts) topics.insert(p.topic);
    for (const auto& topic : topics) {
      std::map<std::string, std::vector<std::optional<NodeId>>> per_phase;
      std::vector<std::optional<NodeId>> all;
      for (const auto& p : u.posts) {
        if (p.topic != topic) continue;
        all.push_back(p.node);
        if (!p.phase.empty()) per_phase[p.phase].push_back(p.node);
      }
      const auto trace = sequence_privacy_nodes(hmm, priors.at(u.user), u.user, all);
      group_risks[{topic, "All"}].push_back(trace.risk);
      auto& b = breakdown[topic];
      b.topic = topic;
      ++b.users;
      b.mean_risk += trace.risk;
      if (trace.privacy_probability == 0.0) ++b.identifiable;
      if (is_unique(trace)) ++b.unique;
      if (is_uniform(trace)) ++b.uniform;
      for (const auto& [phase, seq] : per_phase) {
        group_risks[{topic, phase}].push_back(sequence_privacy_nodes(hmm, priors.at(u.user), u.user, seq).risk);
      }
    }
  }
  for (auto& [key, risks] : group_risks) detail::append_cdf(rep.cdf, key.first, key.second, std::move(risks));
  for (auto& [topic, b] : breakdown) {
    b.mean_risk /= static_cast<double>(b.users);
    rep.breakdown.push_back(b);
  }
  return rep;
}

}  // namespace privlens::privacy
