#pragma once

// Lloyd's K-Means over sparse rows with dense centroids.

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "privlens/textmodel/tfidf.hpp"
#include "privlens/util.hpp"

namespace privlens::textmodel {

struct KMeansOptions {
  std::size_t k = 15;
  std::uint64_t seed = 0;
  std::size_t max_iter = 300;
  double tol = 1e-8;  // stop when every centroid moves less than this (L2)
};

struct KMeansModel {
  std::vector<std::vector<double>> centroids;  // k x dim
  std::vector<std::size_t> assignments;        // per training row
  std::uint64_t seed = 0;
  double inertia = 0.0;
  std::size_t iterations = 0;
  std::size_t reseeded = 0;            // empty clusters re-seeded
  std::vector<double> inertia_history;  // after every assignment step

  std::size_t k() const { return centroids.size(); }

  nlohmann::ordered_json to_json() const {
    nlohmann::ordered_json j;
    j["format"] = "privlens.kmeans";
    j["version"] = 1;
    j["seed"] = seed;
    j["inertia"] = inertia;
    j["iterations"] = iterations;
    j["centroids"] = centroids;
    j["assignments"] = assignments;
    return j;
  }

  static KMeansModel from_json(const nlohmann::json& j) {
    if (j.value("format", "") != "privlens.kmeans" || j.value("version", 0) != 1) {
      throw Error("unsupported K-Means model file");
    }
    KMeansModel m;
    m.seed = j.at("seed").get<std::uint64_t>();
    m.inertia = j.at("inertia").get<double>();
    m.iterations = j.at("iterations").get<std::size_t>();
    m.centroids = j.at("centroids").get<std::vector<std::vector<double>>>();
    m.assignments = j.at("assignments").get<std::vector<std::size_t>>();
    return m;
  }
};

namespace detail {

inline double squared_distance(const SparseVector& x, double x_sq, std::span<const double> c, double c_sq) {
  return std::max(0.0, x_sq - 2.0 * x.dot(c) + c_sq);
}

inline double squared(std::span<const double> c) {
  double s = 0.0;
  for (double v : c) s += v * v;
  return s;
}

}  // namespace detail

// Nearest centroid by Euclidean distance; ties go to the lower index.
inline std::size_t kmeans_predict(const KMeansModel& model, const SparseVector& x) {
  const double x_sq = x.squared_norm();
  std::size_t best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < model.centroids.size(); ++c) {
    const double d = detail::squared_distance(x, x_sq, model.centroids[c], detail::squared(model.centroids[c]));
    if (d < best_d) {
      best_d = d;
      best = c;
    }
  }
  return best;
}

// Greedy farthest-point seeding: a seeded random first centre, then
// repeatedly the row farthest from its nearest chosen centre. Empty clusters
// during iteration are re-seeded from the row farthest from its centroid.
inline KMeansModel kmeans_fit(const TermMatrix& m, const KMeansOptions& opts) {
  const std::size_t n = m.rows.size();
  const std::size_t k = opts.k;
  const std::size_t dim = m.dim;
  if (k == 0) throw Error("kmeans: k must be >= 1");
  if (k > n) {
    throw Error("kmeans: k (" + std::to_string(k) + ") exceeds number of documents (" + std::to_string(n) + ")");
  }
  for (const auto& r : m.rows) {
    if (!r.entries.empty() && r.entries.back().first >= dim) throw Error("kmeans: row index out of range");
  }

  std::vector<double> row_sq(n);
  for (std::size_t i = 0; i < n; ++i) row_sq[i] = m.rows[i].squared_norm();

  auto densify = [&](std::size_t i) {
    std::vector<double> c(dim, 0.0);
    for (const auto& [t, w] : m.rows[i].entries) c[t] = w;
    return c;
  };

  KMeansModel model;
  model.seed = opts.seed;
  Rng rng(opts.seed);

  // Seeding.
  std::vector<double> nearest(n, std::numeric_limits<double>::infinity());
  std::size_t pick = rng.below(n);
  for (std::size_t c = 0; c < k; ++c) {
    model.centroids.push_back(densify(pick));
    const auto& cen = model.centroids.back();
    const double c_sq = detail::squared(cen);
    for (std::size_t i = 0; i < n; ++i) {
      nearest[i] = std::min(nearest[i], detail::squared_distance(m.rows[i], row_sq[i], cen, c_sq));
    }
    std::size_t far = 0;
    for (std::size_t i = 1; i < n; ++i) {
      if (nearest[i] > nearest[far]) far = i;
    }
    pick = far;
  }

  std::vector<std::size_t> assign(n, 0);
  std::vector<double> dist(n, 0.0);
  std::vector<double> cen_sq(k);

  auto assign_step = [&] {
    for (std::size_t c = 0; c < k; ++c) cen_sq[c] = detail::squared(model.centroids[c]);
    for (std::size_t i = 0; i < n; ++i) {
      std::size_t best = 0;
      double best_d = std::numeric_limits<double>::infinity();
      for (std::size_t c = 0; c < k; ++c) {
        const double d = detail::squared_distance(m.rows[i], row_sq[i], model.centroids[c], cen_sq[c]);
        if (d < best_d) {
          best_d = d;
          best = c;
        }
      }
      assign[i] = best;
      dist[i] = best_d;
    }
    // Re-seed empty clusters, one farthest row each.
    std::vector<std::size_t> sizes(k, 0);
    for (auto a : assign) ++sizes[a];
    for (std::size_t c = 0; c < k; ++c) {
      if (sizes[c] > 0) continue;
      std::size_t far = n;
      for (std::size_t i = 0; i < n; ++i) {
        if (sizes[assign[i]] <= 1) continue;
        if (far == n || dist[i] > dist[far]) far = i;
      }
      if (far == n) continue;
      --sizes[assign[far]];
      model.centroids[c] = densify(far);
      cen_sq[c] = row_sq[far];
      assign[far] = c;
      dist[far] = 0.0;
      sizes[c] = 1;
      ++model.reseeded;
    }
    double inertia = 0.0;
    for (double d : dist) inertia += d;
    model.inertia_history.push_back(inertia);
    return inertia;
  };

  for (model.iterations = 0; model.iterations < opts.max_iter;) {
    assign_step();
    ++model.iterations;
    std::vector<std::vector<double>> next(k, std::vector<double>(dim, 0.0));
    std::vector<std::size_t> sizes(k, 0);
    for (std::size_t i = 0; i < n; ++i) {
      ++sizes[assign[i]];
      for (const auto& [t, w] : m.rows[i].entries) next[assign[i]][t] += w;
    }
    double shift = 0.0;
    for (std::size_t c = 0; c < k; ++c) {
      if (sizes[c] == 0) {
        next[c] = model.centroids[c];
        continue;
      }
      double s = 0.0;
      for (std::size_t t = 0; t < dim; ++t) {
        next[c][t] /= static_cast<double>(sizes[c]);
        const double dlt = next[c][t] - model.centroids[c][t];
        s += dlt * dlt;
      }
      shift = std::max(shift, std::sqrt(s));
    }
    model.centroids = std::move(next);
    if (shift < opts.tol) break;
  }
  model.inertia = assign_step();
  model.assignments = assign;
  return model;
}

// Highest-weight centroid coordinates (positive weights only), ties broken
// lexicographically by term.
inline std::vector<std::pair<std::string, double>> top_terms(const KMeansModel& model, const Vocabulary& vocab,
                                                             std::size_t cluster, std::size_t n) {
  if (cluster >= model.k()) throw Error("top_terms: no cluster " + std::to_string(cluster));
  const auto& c = model.centroids[cluster];
  std::vector<std::size_t> idx;
  for (std::size_t t = 0; t < c.size(); ++t) {
    if (c[t] > 0.0) idx.push_back(t);
  }
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    if (c[a] != c[b]) return c[a] > c[b];
    return vocab.term(a) < vocab.term(b);
  });
  if (idx.size() > n) idx.resize(n);
  std::vector<std::pair<std::string, double>> out;
  for (auto t : idx) out.emplace_back(vocab.term(t), c[t]);
  return out;
}

}  // namespace privlens::textmodel
