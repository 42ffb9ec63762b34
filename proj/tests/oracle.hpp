#pragma once

// Brute-force reference for the sequence privacy probability. Counts come
// straight from raw labelled sequences and the prior enumerates paths as
// explicit node lists, so nothing is shared with the library's HMM code.

#include <algorithm>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "privlens/privacy/risk.hpp"
#include "privlens/textmodel/tfidf.hpp"
#include "privlens/util.hpp"

namespace oracle {

// One user's training sequence of node labels.
struct LabelledSequence {
  std::string user;
  std::vector<std::string> labels;
};

struct Counts {
  std::map<std::string, int> start;
  int starts = 0;
  std::map<std::pair<std::string, std::string>, int> transition;
  std::map<std::string, int> outgoing;
  std::map<std::pair<std::string, std::string>, int> observed;  // (user, node)
  std::map<std::string, int> observed_total;
};

inline Counts count(const std::vector<LabelledSequence>& seqs) {
  Counts c;
  for (const auto& s : seqs) {
    if (s.labels.empty()) continue;
    ++c.start[s.labels[0]];
    ++c.starts;
    for (std::size_t i = 0; i < s.labels.size(); ++i) {
      ++c.observed[{s.user, s.labels[i]}];
      ++c.observed_total[s.labels[i]];
      if (i + 1 < s.labels.size()) {
        ++c.transition[{s.labels[i], s.labels[i + 1]}];
        ++c.outgoing[s.labels[i]];
      }
    }
  }
  return c;
}

inline int get(const std::map<std::pair<std::string, std::string>, int>& m, const std::string& a,
               const std::string& b) {
  auto it = m.find({a, b});
  return it == m.end() ? 0 : it->second;
}

// prev: nullopt for the sequence start; "" for a previous post that matched
// nothing.
inline double factor(const Counts& c, const std::string& user, const std::optional<std::string>& prev,
                     const std::string& node) {
  if (!c.observed_total.count(node)) return 0.0;
  double transition = 0.0;
  if (!prev) {
    const auto it = c.start.find(node);
    const int n = it == c.start.end() ? 0 : it->second;
    if (n > 0) transition = (1.0 / n) * (static_cast<double>(n) / c.starts);
  } else if (c.observed_total.count(*prev)) {
    const int n = get(c.transition, *prev, node);
    if (n > 0) transition = (1.0 / n) * (static_cast<double>(n) / c.outgoing.at(*prev));
  }
  const int o = get(c.observed, user, node);
  const double observation = o > 0 ? 1.0 - (1.0 / o) * (static_cast<double>(o) / c.observed_total.at(node)) : 1.0;
  return transition * observation;
}

// Minimum path product over start-anchored simple paths of at most
// `max_len` nodes that visit a node the user observed; 1 if there is none.
inline double prior(const Counts& pii, const std::string& user, std::size_t max_len = 6) {
  std::vector<std::vector<std::string>> frontier;
  for (const auto& [n, k] : pii.start) {
    if (k > 0) frontier.push_back({n});
  }
  double best = std::numeric_limits<double>::infinity();
  bool any = false;
  while (!frontier.empty()) {
    auto path = frontier.back();
    frontier.pop_back();
    bool touches = false;
    for (const auto& n : path) touches = touches || get(pii.observed, user, n) > 0;
    if (touches) {
      double p = factor(pii, user, std::nullopt, path[0]);
      for (std::size_t i = 1; i < path.size(); ++i) p *= factor(pii, user, path[i - 1], path[i]);
      best = std::min(best, p);
      any = true;
    }
    if (path.size() == max_len) continue;
    for (const auto& [edge, k] : pii.transition) {
      if (edge.first != path.back() || k == 0) continue;
      if (std::find(path.begin(), path.end(), edge.second) != path.end()) continue;
      auto next = path;
      next.push_back(edge.second);
      frontier.push_back(std::move(next));
    }
  }
  return any ? best : 1.0;
}

// Privacy probability of `test` (labels; "" = matched no node).
inline double privacy(const Counts& model, const Counts& pii, const std::string& user,
                      const std::vector<std::string>& test) {
  if (test.empty()) return 1.0;
  double p = prior(pii, user);
  std::optional<std::string> prev;
  for (const auto& n : test) {
    p *= n.empty() ? 0.0 : factor(model, user, prev, n);
    prev = n;
  }
  return p;
}

// --- library side -----------------------------------------------------------

// One-hot vector of a label ("" -> empty): distinct labels are orthogonal,
// so similarity matching reproduces label identity.
inline privlens::textmodel::SparseVector one_hot(const std::string& label) {
  privlens::textmodel::SparseVector v;
  if (label.empty()) return v;
  std::uint32_t id = 0;
  for (char c : label) id = id * 31 + static_cast<unsigned char>(c);
  v.entries.emplace_back(id, 1.0);
  return v;
}

inline std::vector<privlens::textmodel::SparseVector> vectors(const std::vector<std::string>& labels) {
  std::vector<privlens::textmodel::SparseVector> out;
  for (const auto& l : labels) out.push_back(one_hot(l));
  return out;
}

// HMM with one node per distinct label.
inline privlens::privacy::PrivacyHmm build(const std::vector<LabelledSequence>& seqs) {
  privlens::privacy::PrivacyHmm h(0.8);
  for (const auto& s : seqs) {
    std::vector<privlens::privacy::NodeId> ids;
    for (const auto& l : s.labels) ids.push_back(h.match_or_add(l, one_hot(l)));
    h.observe_sequence(s.user, ids);
  }
  return h;
}

inline std::vector<std::optional<privlens::privacy::NodeId>> lookup(const privlens::privacy::PrivacyHmm& h,
                                                                    const std::vector<std::string>& labels) {
  std::vector<std::optional<privlens::privacy::NodeId>> out;
  for (const auto& l : labels) out.push_back(l.empty() ? std::nullopt : h.match_node({}, l));
  return out;
}

// Random micro-corpus: at most 4 users, 6 nodes and sequences of 5.
struct MicroCorpus {
  std::vector<LabelledSequence> train;
  std::vector<LabelledSequence> pii;  // subset of train
  std::vector<LabelledSequence> test;  // may hold unseen labels and ""
};

inline MicroCorpus random_micro_corpus(privlens::Rng& rng) {
  static const char* alphabet[] = {"a", "b", "c", "d", "e", "f"};
  static const char* users[] = {"u1", "u2", "u3", "u4"};
  const std::size_t letters = 2 + rng.below(5);
  MicroCorpus m;
  const std::size_t seqs = 1 + rng.below(8);
  for (std::size_t s = 0; s < seqs; ++s) {
    LabelledSequence ls{users[rng.below(4)], {}};
    const std::size_t len = 1 + rng.below(5);
    for (std::size_t i = 0; i < len; ++i) ls.labels.push_back(alphabet[rng.below(letters)]);
    m.train.push_back(ls);
    if (rng.uniform() < 0.5) m.pii.push_back(ls);
  }
  for (const char* u : users) {
    LabelledSequence ls{u, {}};
    const std::size_t len = 1 + rng.below(5);
    for (std::size_t i = 0; i < len; ++i) {
      const double r = rng.uniform();
      ls.labels.push_back(r < 0.1 ? "zz" : r < 0.15 ? "" : alphabet[rng.below(letters)]);
    }
    m.test.push_back(ls);
  }
  return m;
}

}  // namespace oracle
