#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "json.hpp"
#include "privlens/util.hpp"

namespace privlens::textmodel {

// Sparse row: (term index, weight) pairs sorted by index, no duplicates.
struct SparseVector {
  std::vector<std::pair<std::uint32_t, double>> entries;

  bool empty() const { return entries.empty(); }

  double squared_norm() const {
    double s = 0.0;
    for (const auto& [i, w] : entries) s += w * w;
    return s;
  }

  double dot(const SparseVector& o) const {
    double s = 0.0;
    auto a = entries.begin(), b = o.entries.begin();
    while (a != entries.end() && b != o.entries.end()) {
      if (a->first < b->first) {
        ++a;
      } else if (b->first < a->first) {
        ++b;
      } else {
        s += a->second * b->second;
        ++a;
        ++b;
      }
    }
    return s;
  }

  double dot(std::span<const double> dense) const {
    double s = 0.0;
    for (const auto& [i, w] : entries) s += w * dense[i];
    return s;
  }

  bool operator==(const SparseVector&) const = default;
};

inline double cosine(const SparseVector& a, const SparseVector& b) {
  const double na = a.squared_norm(), nb = b.squared_norm();
  if (na == 0.0 || nb == 0.0) return 0.0;
  return a.dot(b) / std::sqrt(na * nb);
}

// Term index (lexicographic order, dense 0..V-1) plus document frequencies.
class Vocabulary {
 public:
  Vocabulary() = default;

  std::size_t size() const { return terms_.size(); }
  std::size_t num_docs() const { return num_docs_; }
  const std::string& term(std::size_t i) const { return terms_.at(i); }
  const std::vector<std::string>& terms() const { return terms_; }
  std::size_t df(std::size_t i) const { return df_.at(i); }

  std::optional<std::uint32_t> index(const std::string& term) const {
    auto it = index_.find(term);
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }

  // Smoothed inverse document frequency: ln((1+N)/(1+df)) + 1.
  double idf(std::size_t i) const {
    return std::log((1.0 + static_cast<double>(num_docs_)) / (1.0 + static_cast<double>(df_.at(i)))) + 1.0;
  }

  static Vocabulary build(std::span<const std::vector<std::string>> docs) {
    std::map<std::string, std::size_t> df;
    for (const auto& doc : docs) {
      std::vector<std::string> uniq(doc.begin(), doc.end());
      std::sort(uniq.begin(), uniq.end());
      uniq.erase(std::unique(uniq.begin(), uniq.end()), uniq.end());
      for (auto& t : uniq) ++df[t];
    }
    Vocabulary v;
    v.num_docs_ = docs.size();
    for (auto& [t, n] : df) {
      v.index_.emplace(t, static_cast<std::uint32_t>(v.terms_.size()));
      v.terms_.push_back(t);
      v.df_.push_back(n);
    }
    return v;
  }

  nlohmann::ordered_json to_json() const {
    nlohmann::ordered_json j;
    j["num_docs"] = num_docs_;
    j["terms"] = terms_;
    j["df"] = df_;
    return j;
  }

  static Vocabulary from_json(const nlohmann::json& j) {
    Vocabulary v;
    v.num_docs_ = j.at("num_docs").get<std::size_t>();
    v.terms_ = j.at("terms").get<std::vector<std::string>>();
    v.df_ = j.at("df").get<std::vector<std::size_t>>();
    if (v.terms_.size() != v.df_.size()) throw Error("vocabulary: terms/df length mismatch");
    for (std::size_t i = 0; i < v.terms_.size(); ++i) {
      v.index_.emplace(v.terms_[i], static_cast<std::uint32_t>(i));
    }
    return v;
  }

 private:
  std::vector<std::string> terms_;
  std::vector<std::size_t> df_;
  std::unordered_map<std::string, std::uint32_t> index_;
  std::size_t num_docs_ = 0;
};

enum class Weighting { TfIdf, RawCounts };

struct TermMatrix {
  std::vector<SparseVector> rows;
  Weighting weighting = Weighting::TfIdf;
  std::size_t dim = 0;
};

inline Vocabulary tfidf_fit(std::span<const std::vector<std::string>> docs) {
  auto vocab = Vocabulary::build(docs);
  if (vocab.size() == 0) throw Error("no features: every document is empty");
  return vocab;
}

// Raw term counts for in-vocabulary tokens.
inline SparseVector count_vector(const Vocabulary& vocab, std::span<const std::string> doc) {
  std::map<std::uint32_t, double> counts;
  for (const auto& t : doc) {
    if (auto i = vocab.index(t)) counts[*i] += 1.0;
  }
  SparseVector v;
  v.entries.assign(counts.begin(), counts.end());
  return v;
}

// tf(t,d) * idf(t), L2-normalised; out-of-vocabulary tokens carry no weight
// and an all-OOV document maps to the zero vector.
inline SparseVector tfidf_transform(const Vocabulary& vocab, std::span<const std::string> doc) {
  SparseVector v = count_vector(vocab, doc);
  for (auto& [i, w] : v.entries) w *= vocab.idf(i);
  const double norm = std::sqrt(v.squared_norm());
  if (norm > 0.0) {
    for (auto& [i, w] : v.entries) w /= norm;
  }
  return v;
}

inline TermMatrix tfidf_matrix(const Vocabulary& vocab, std::span<const std::vector<std::string>> docs) {
  TermMatrix m;
  m.weighting = Weighting::TfIdf;
  m.dim = vocab.size();
  m.rows.reserve(docs.size());
  for (const auto& d : docs) m.rows.push_back(tfidf_transform(vocab, d));
  return m;
}

}  // namespace privlens::textmodel
