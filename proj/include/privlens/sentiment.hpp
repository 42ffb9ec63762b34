#pragma once

// Lexicon polarity scoring with the square-root normalisation
// compound = s / sqrt(s^2 + 15), three-way labelling and per-group
// label distributions.

#include <array>
#include <cmath>
#include <map>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "privlens/textmodel/text.hpp"
#include "privlens/util.hpp"

namespace privlens::sentiment {

inline constexpr double kNormalization = 15.0;
inline constexpr double kDefaultThreshold = 0.05;

class Lexicon {
 public:
  Lexicon() = default;

  // `term<TAB>valence`; further tab-separated columns are ignored so
  // richer lexicon files load unchanged.
  static Lexicon parse(std::string_view content) {
    Lexicon lex;
    std::size_t line_no = 0;
    for (const auto& raw : split(content, '\n')) {
      ++line_no;
      std::string_view line = raw;
      if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
      if (trim(line).empty() || trim(line).front() == '#') continue;
      const auto cols = split(line, '\t');
      if (cols.size() < 2) throw ConfigError("lexicon line " + std::to_string(line_no) + ": expected term<TAB>valence");
      auto v = parse_double(cols[1]);
      if (!v) throw ConfigError("lexicon line " + std::to_string(line_no) + ": bad valence '" + cols[1] + "'");
      if (*v < -4.0 || *v > 4.0) {
        throw ConfigError("lexicon line " + std::to_string(line_no) + ": valence outside [-4, 4]");
      }
      lex.valence_[to_lower_ascii(trim(cols[0]))] = *v;
    }
    return lex;
  }

  static Lexicon load(const std::string& path) { return parse(read_file(path)); }

  void set(std::string term, double valence) { valence_[to_lower_ascii(term)] = valence; }

  std::optional<double> valence(const std::string& term) const {
    auto it = valence_.find(term);
    if (it == valence_.end()) return std::nullopt;
    return it->second;
  }

  std::size_t size() const { return valence_.size(); }

 private:
  std::unordered_map<std::string, double> valence_;
};

struct PolarityScore {
  double raw_sum = 0.0;
  double compound = 0.0;
};

inline double compound_from_raw(double raw) { return raw / std::sqrt(raw * raw + kNormalization); }

inline PolarityScore score_tokens(std::span<const std::string> tokens, const Lexicon& lex) {
  PolarityScore s;
  for (const auto& t : tokens) {
    if (auto v = lex.valence(t)) s.raw_sum += *v;
  }
  s.compound = compound_from_raw(s.raw_sum);
  return s;
}

// Tokenised with the shared normalisation rules (no stopword removal, so
// valence-bearing function words still count).
inline PolarityScore score(std::string_view text, const Lexicon& lex) {
  const auto tokens = textmodel::tokenize(text);
  return score_tokens(tokens, lex);
}

enum class Label { Positive, Neutral, Negative };

inline const char* label_name(Label l) {
  switch (l) {
    case Label::Positive: return "positive";
    case Label::Neutral: return "neutral";
    case Label::Negative: return "negative";
  }
  return "neutral";
}

inline Label label(const PolarityScore& s, double threshold = kDefaultThreshold) {
  if (threshold < 0.0) throw Error("sentiment threshold must be >= 0");
  if (threshold == 0.0) {
    if (s.compound > 0.0) return Label::Positive;
    if (s.compound < 0.0) return Label::Negative;
    return Label::Neutral;
  }
  if (s.compound >= threshold) return Label::Positive;
  if (s.compound <= -threshold) return Label::Negative;
  return Label::Neutral;
}

struct Distribution {
  std::size_t count = 0;
  double positive = 0.0;
  double neutral = 0.0;
  double negative = 0.0;
};

// Label tallies keyed by (topic, phase). Merging tallies is associative and
// commutative, so shards can be reduced in any order.
class Aggregator {
 public:
  using Key = std::pair<std::string, std::string>;

  void add(const std::string& topic, const std::string& phase, Label l) {
    auto& c = counts_[{topic, phase}];
    ++c[static_cast<std::size_t>(l)];
  }

  void merge(const Aggregator& o) {
    for (const auto& [k, c] : o.counts_) {
      auto& mine = counts_[k];
      for (std::size_t i = 0; i < 3; ++i) mine[i] += c[i];
    }
  }

  // Fractions per group; groups without labels never appear.
  std::map<Key, Distribution> distributions() const {
    std::map<Key, Distribution> out;
    for (const auto& [k, c] : counts_) {
      const std::size_t n = c[0] + c[1] + c[2];
      if (n == 0) continue;
      const double dn = static_cast<double>(n);
      Distribution d;
      d.count = n;
      d.positive = static_cast<double>(c[0]) / dn;
      d.neutral = static_cast<double>(c[1]) / dn;
      d.negative = static_cast<double>(c[2]) / dn;
      out.emplace(k, d);
    }
    return out;
  }

  // CSV `topic,phase,positive,neutral,negative` with 6 decimals.
  CsvTable to_csv() const {
    CsvTable t;
    t.header = {"topic", "phase", "positive", "neutral", "negative"};
    for (const auto& [k, d] : distributions()) {
      t.rows.push_back({k.first, k.second, fmt_fixed(d.positive), fmt_fixed(d.neutral), fmt_fixed(d.negative)});
    }
    return t;
  }

 private:
  std::map<Key, std::array<std::size_t, 3>> counts_;
};

}  // namespace privlens::sentiment
