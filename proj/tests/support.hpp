#pragma once

// Shared test helpers: fixture paths, scratch directories and small
// reference computations used as oracles.

#include <cmath>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace testsupport {

namespace fs = std::filesystem;

inline fs::path data_dir() { return fs::path(PRIVLENS_DATA_DIR); }

// Fresh, empty directory under the system temp dir.
inline fs::path scratch_dir(const std::string& name) {
  const auto p = fs::temp_directory_path() / ("privlens_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

inline double choose2(double n) { return n * (n - 1.0) / 2.0; }

// Adjusted Rand index from the contingency table.
template <class A, class B>
double adjusted_rand_index(const std::vector<A>& a, const std::vector<B>& b) {
  std::map<std::pair<A, B>, double> cells;
  std::map<A, double> rows;
  std::map<B, double> cols;
  for (std::size_t i = 0; i < a.size(); ++i) {
    cells[{a[i], b[i]}] += 1;
    rows[a[i]] += 1;
    cols[b[i]] += 1;
  }
  double index = 0, sr = 0, sc = 0;
  for (const auto& [k, n] : cells) index += choose2(n);
  for (const auto& [k, n] : rows) sr += choose2(n);
  for (const auto& [k, n] : cols) sc += choose2(n);
  const double expected = sr * sc / choose2(static_cast<double>(a.size()));
  const double max_index = (sr + sc) / 2.0;
  if (max_index == expected) return 1.0;
  return (index - expected) / (max_index - expected);
}

}  // namespace testsupport
