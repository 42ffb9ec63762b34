#pragma once

// Latent Dirichlet Allocation fitted by collapsed Gibbs sampling.
//
// Notation in comments: n_dk tokens of doc d in topic k, n_kw tokens of word
// w in topic k, n_k tokens in topic k, V vocabulary size. The full
// conditional for one token is
//
//   p(z = k | rest) ~ (n_dk + alpha) * (n_kw + beta) / (n_k + V * beta)
//
// with the token's own assignment removed from the counts.

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "privlens/textmodel/tfidf.hpp"
#include "privlens/util.hpp"

namespace privlens::textmodel {

struct LdaOptions {
  std::size_t num_topics = 15;
  std::optional<double> alpha;  // default 50 / K
  double beta = 0.01;
  std::size_t iterations = 200;
  std::uint64_t seed = 0;
};

class LdaModel {
 public:
  std::size_t num_topics() const { return K_; }
  std::size_t vocab_size() const { return V_; }
  std::size_t num_docs() const { return doc_len_.size(); }
  double alpha() const { return alpha_; }
  double beta() const { return beta_; }
  std::uint64_t seed() const { return seed_; }
  std::size_t iterations() const { return iterations_; }
  const std::vector<std::string>& warnings() const { return warnings_; }

  std::int64_t topic_word(std::size_t k, std::size_t w) const { return n_kw_[k * V_ + w]; }
  std::int64_t topic_total(std::size_t k) const { return n_k_[k]; }
  std::int64_t doc_topic(std::size_t d, std::size_t k) const { return n_dk_[d * K_ + k]; }
  std::int64_t doc_length(std::size_t d) const { return doc_len_[d]; }

  std::int64_t total_topic_word() const {
    std::int64_t s = 0;
    for (auto v : n_kw_) s += v;
    return s;
  }

  // (n_kw + beta) / (n_k + V beta)
  double phi(std::size_t k, std::size_t w) const {
    return (static_cast<double>(n_kw_[k * V_ + w]) + beta_) /
           (static_cast<double>(n_k_[k]) + static_cast<double>(V_) * beta_);
  }

  // (n_dk + alpha) / (n_d + K alpha)
  double theta(std::size_t d, std::size_t k) const {
    return (static_cast<double>(n_dk_[d * K_ + k]) + alpha_) /
           (static_cast<double>(doc_len_[d]) + static_cast<double>(K_) * alpha_);
  }

  std::vector<double> phi_row(std::size_t k) const {
    std::vector<double> r(V_);
    for (std::size_t w = 0; w < V_; ++w) r[w] = phi(k, w);
    return r;
  }

  std::vector<double> theta_row(std::size_t d) const {
    std::vector<double> r(K_);
    for (std::size_t k = 0; k < K_; ++k) r[k] = theta(d, k);
    return r;
  }

  // Top-n word indices of topic k by count, ties by lower index.
  std::vector<std::size_t> top_words(std::size_t k, std::size_t n) const {
    std::vector<std::size_t> idx(V_);
    for (std::size_t w = 0; w < V_; ++w) idx[w] = w;
    std::stable_sort(idx.begin(), idx.end(), [&](auto a, auto b) { return topic_word(k, a) > topic_word(k, b); });
    if (idx.size() > n) idx.resize(n);
    return idx;
  }

  nlohmann::ordered_json to_json() const {
    nlohmann::ordered_json j;
    j["format"] = "privlens.lda";
    j["version"] = 1;
    j["num_topics"] = K_;
    j["vocab_size"] = V_;
    j["alpha"] = alpha_;
    j["beta"] = beta_;
    j["seed"] = seed_;
    j["iterations"] = iterations_;
    j["topic_word"] = n_kw_;
    j["doc_topic"] = n_dk_;
    j["doc_length"] = doc_len_;
    return j;
  }

  static LdaModel from_json(const nlohmann::json& j) {
    if (j.value("format", "") != "privlens.lda" || j.value("version", 0) != 1) {
      throw Error("unsupported LDA model file");
    }
    LdaModel m;
    m.K_ = j.at("num_topics").get<std::size_t>();
    m.V_ = j.at("vocab_size").get<std::size_t>();
    m.alpha_ = j.at("alpha").get<double>();
    m.beta_ = j.at("beta").get<double>();
    m.seed_ = j.at("seed").get<std::uint64_t>();
    m.iterations_ = j.at("iterations").get<std::size_t>();
    m.n_kw_ = j.at("topic_word").get<std::vector<std::int64_t>>();
    m.n_dk_ = j.at("doc_topic").get<std::vector<std::int64_t>>();
    m.doc_len_ = j.at("doc_length").get<std::vector<std::int64_t>>();
    if (m.n_kw_.size() != m.K_ * m.V_ || m.n_dk_.size() != m.K_ * m.doc_len_.size()) {
      throw Error("LDA model file: count matrix shape mismatch");
    }
    m.n_k_.assign(m.K_, 0);
    for (std::size_t k = 0; k < m.K_; ++k) {
      for (std::size_t w = 0; w < m.V_; ++w) {
        if (m.n_kw_[k * m.V_ + w] < 0) throw Error("LDA model file: negative count");
        m.n_k_[k] += m.n_kw_[k * m.V_ + w];
      }
    }
    return m;
  }

 private:
  friend LdaModel lda_fit(std::span<const std::vector<std::uint32_t>>, std::size_t, const LdaOptions&,
                          const std::function<void(std::size_t, const LdaModel&)>&);

  std::size_t K_ = 0;
  std::size_t V_ = 0;
  double alpha_ = 0.0;
  double beta_ = 0.0;
  std::uint64_t seed_ = 0;
  std::size_t iterations_ = 0;
  std::vector<std::int64_t> n_kw_;
  std::vector<std::int64_t> n_k_;
  std::vector<std::int64_t> n_dk_;
  std::vector<std::int64_t> doc_len_;
  std::vector<std::string> warnings_;
};

// Token ids per document, in-vocabulary tokens only.
inline std::vector<std::vector<std::uint32_t>> to_token_ids(const Vocabulary& vocab,
                                                            std::span<const std::vector<std::string>> docs) {
  std::vector<std::vector<std::uint32_t>> out;
  out.reserve(docs.size());
  for (const auto& d : docs) {
    std::vector<std::uint32_t> ids;
    for (const auto& t : d) {
      if (auto i = vocab.index(t)) ids.push_back(*i);
    }
    out.push_back(std::move(ids));
  }
  return out;
}

// `on_sweep(s, model)` runs after initialisation (s = 0) and after every
// sweep s = 1..iterations.
inline LdaModel lda_fit(std::span<const std::vector<std::uint32_t>> docs, std::size_t vocab_size,
                        const LdaOptions& opts,
                        const std::function<void(std::size_t, const LdaModel&)>& on_sweep = {}) {
  const std::size_t K = opts.num_topics;
  if (K == 0) throw Error("lda: K must be >= 1");
  std::size_t tokens = 0;
  for (const auto& d : docs) tokens += d.size();
  if (docs.empty() || tokens == 0) throw Error("lda: empty corpus");

  LdaModel m;
  m.K_ = K;
  m.V_ = vocab_size;
  m.alpha_ = opts.alpha.value_or(50.0 / static_cast<double>(K));
  m.beta_ = opts.beta;
  m.seed_ = opts.seed;
  m.iterations_ = opts.iterations;
  if (K > vocab_size) {
    m.warnings_.push_back("K (" + std::to_string(K) + ") exceeds vocabulary size (" + std::to_string(vocab_size) + ")");
  }
  m.n_kw_.assign(K * vocab_size, 0);
  m.n_k_.assign(K, 0);
  m.n_dk_.assign(K * docs.size(), 0);
  m.doc_len_.resize(docs.size());

  Rng rng(opts.seed);
  std::vector<std::vector<std::uint32_t>> z(docs.size());
  for (std::size_t d = 0; d < docs.size(); ++d) {
    m.doc_len_[d] = static_cast<std::int64_t>(docs[d].size());
    z[d].resize(docs[d].size());
    for (std::size_t i = 0; i < docs[d].size(); ++i) {
      const auto w = docs[d][i];
      if (w >= vocab_size) throw Error("lda: token id out of range");
      const auto k = static_cast<std::uint32_t>(rng.below(K));
      z[d][i] = k;
      ++m.n_kw_[k * vocab_size + w];
      ++m.n_k_[k];
      ++m.n_dk_[d * K + k];
    }
  }
  if (on_sweep) on_sweep(0, m);

  const double vbeta = static_cast<double>(vocab_size) * m.beta_;
  std::vector<double> cumulative(K);
  for (std::size_t it = 1; it <= opts.iterations; ++it) {
    for (std::size_t d = 0; d < docs.size(); ++d) {
      for (std::size_t i = 0; i < docs[d].size(); ++i) {
        const auto w = docs[d][i];
        const auto old = z[d][i];
        --m.n_kw_[old * vocab_size + w];
        --m.n_k_[old];
        --m.n_dk_[d * K + old];
        double total = 0.0;
        for (std::size_t k = 0; k < K; ++k) {
          total += (static_cast<double>(m.n_dk_[d * K + k]) + m.alpha_) *
                   (static_cast<double>(m.n_kw_[k * vocab_size + w]) + m.beta_) /
                   (static_cast<double>(m.n_k_[k]) + vbeta);
          cumulative[k] = total;
        }
        const double u = rng.uniform() * total;
        std::size_t k = 0;
        while (k + 1 < K && cumulative[k] <= u) ++k;
        z[d][i] = static_cast<std::uint32_t>(k);
        ++m.n_kw_[k * vocab_size + w];
        ++m.n_k_[k];
        ++m.n_dk_[d * K + k];
      }
    }
    if (on_sweep) on_sweep(it, m);
  }
  return m;
}

struct LdaInference {
  std::vector<double> distribution;
  std::optional<std::string> warning;
};

// Folds in one unseen document with the topic-word counts held fixed.
inline LdaInference lda_infer(const LdaModel& model, std::span<const std::uint32_t> doc, std::size_t iterations,
                              std::uint64_t seed) {
  const std::size_t K = model.num_topics();
  std::vector<std::uint32_t> tokens;
  for (auto w : doc) {
    if (w < model.vocab_size()) tokens.push_back(w);
  }
  LdaInference out;
  if (tokens.empty()) {
    out.distribution.assign(K, 1.0 / static_cast<double>(K));
    out.warning = doc.empty() ? "empty document: uniform topic distribution"
                              : "all tokens out of vocabulary: uniform topic distribution";
    return out;
  }
  Rng rng(seed);
  std::vector<std::int64_t> n_k(K, 0);
  std::vector<std::uint32_t> z(tokens.size());
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    z[i] = static_cast<std::uint32_t>(rng.below(K));
    ++n_k[z[i]];
  }
  std::vector<double> cumulative(K);
  for (std::size_t it = 0; it < iterations; ++it) {
    for (std::size_t i = 0; i < tokens.size(); ++i) {
      --n_k[z[i]];
      double total = 0.0;
      for (std::size_t k = 0; k < K; ++k) {
        total += (static_cast<double>(n_k[k]) + model.alpha()) * model.phi(k, tokens[i]);
        cumulative[k] = total;
      }
      const double u = rng.uniform() * total;
      std::size_t k = 0;
      while (k + 1 < K && cumulative[k] <= u) ++k;
      z[i] = static_cast<std::uint32_t>(k);
      ++n_k[k];
    }
  }
  out.distribution.resize(K);
  const double denom = static_cast<double>(tokens.size()) + static_cast<double>(K) * model.alpha();
  for (std::size_t k = 0; k < K; ++k) {
    out.distribution[k] = (static_cast<double>(n_k[k]) + model.alpha()) / denom;
  }
  return out;
}

}  // namespace privlens::textmodel
