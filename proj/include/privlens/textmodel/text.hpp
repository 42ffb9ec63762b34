#pragma once

// Text preprocessing: normalisation, tokenisation, stopword removal,
// dictionary-first lemmatisation and hashtag explosion.

#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "privlens/corpus.hpp"
#include "privlens/util.hpp"

namespace privlens::textmodel {

namespace detail {

inline bool is_ascii_alnum(char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9');
}

// Non-ASCII bytes belong to words so UTF-8 text survives untouched.
inline bool is_word_byte(char c) {
  return is_ascii_alnum(c) || c == '_' || static_cast<unsigned char>(c) >= 0x80;
}

inline bool is_space(char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\v' || c == '\f'; }

// Length of a "scheme://..." span starting at i, or 0.
inline std::size_t url_span(std::string_view s, std::size_t i) {
  if (i > 0 && !is_space(s[i - 1])) return 0;
  std::size_t j = i;
  while (j < s.size() && ((s[j] >= 'a' && s[j] <= 'z') || (s[j] >= 'A' && s[j] <= 'Z') ||
                          (j > i && ((s[j] >= '0' && s[j] <= '9') || s[j] == '+' || s[j] == '.' || s[j] == '-')))) {
    ++j;
  }
  if (j == i || s.substr(j, 3) != "://") return 0;
  j += 3;
  while (j < s.size() && !is_space(s[j])) ++j;
  return j - i;
}

}  // namespace detail

// Lowercases and strips URLs, @-mentions, '#' markers and punctuation, then
// collapses whitespace. Apostrophes inside words are dropped ("don't" ->
// "dont"); hyphens between alphanumerics are kept ("covid-19").
inline std::string normalize(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  auto push_space = [&] {
    if (!out.empty() && out.back() != ' ') out.push_back(' ');
  };
  std::size_t i = 0;
  while (i < text.size()) {
    const char c = text[i];
    if (const auto n = detail::url_span(text, i)) {
      push_space();
      i += n;
      continue;
    }
    if (c == '@' && (i == 0 || !detail::is_word_byte(text[i - 1]))) {
      std::size_t j = i + 1;
      while (j < text.size() && detail::is_word_byte(text[j])) ++j;
      if (j > i + 1) {
        push_space();
        i = j;
        continue;
      }
    }
    if (detail::is_word_byte(c)) {
      out.push_back(c >= 'A' && c <= 'Z' ? static_cast<char>(c - 'A' + 'a') : c);
    } else if ((c == '\'' || c == '-') && !out.empty() && out.back() != ' ' && i + 1 < text.size() &&
               detail::is_word_byte(text[i + 1])) {
      if (c == '-') out.push_back('-');
    } else {
      push_space();
    }
    ++i;
  }
  if (!out.empty() && out.back() == ' ') out.pop_back();
  return out;
}

inline std::vector<std::string> tokenize(std::string_view text) { return split_whitespace(normalize(text)); }

// ---------------------------------------------------------------------------
// Stopwords
// ---------------------------------------------------------------------------

class StopwordSet {
 public:
  StopwordSet() = default;
  explicit StopwordSet(std::unordered_set<std::string> words) : words_(std::move(words)) {}

  // One word per line; blank lines and lines starting with '#' are ignored.
  static StopwordSet parse(std::string_view content) {
    std::unordered_set<std::string> w;
    for (const auto& raw : split(content, '\n')) {
      const auto line = trim(raw);
      if (line.empty() || line.front() == '#') continue;
      w.insert(to_lower_ascii(line));
    }
    return StopwordSet(std::move(w));
  }

  static StopwordSet load(const std::string& path) { return parse(read_file(path)); }

  // Compact English list plus the pandemic terms that would otherwise
  // dominate every cluster.
  static StopwordSet english_default() {
    static const char* kWords[] = {
        "a", "about", "above", "after", "again", "against", "all", "am", "an", "and", "any", "are",
        "as", "at", "be", "because", "been", "before", "being", "below", "between", "both", "but",
        "by", "can", "could", "did", "do", "does", "doing", "dont", "down", "during", "each", "few",
        "for", "from", "further", "get", "got", "had", "has", "have", "having", "he", "her", "here",
        "hers", "herself", "him", "himself", "his", "how", "i", "if", "im", "in", "into", "is", "it",
        "its", "itself", "just", "me", "more", "most", "my", "myself", "no", "nor", "not", "now",
        "of", "off", "on", "once", "only", "or", "other", "our", "ours", "ourselves", "out", "over",
        "own", "rt", "same", "she", "should", "so", "some", "such", "than", "that", "the", "their",
        "theirs", "them", "themselves", "then", "there", "these", "they", "this", "those",
        "through", "to", "too", "under", "until", "up", "very", "was", "we", "were", "what",
        "when", "where", "which", "while", "who", "whom", "why", "will", "with", "would", "you",
        "your", "yours", "yourself", "yourselves", "amp",
        "covid", "covid-19", "covid19", "coronavirus", "corona", "sars-cov-2", "ncov"};
    std::unordered_set<std::string> w;
    for (const char* s : kWords) w.insert(s);
    return StopwordSet(std::move(w));
  }

  bool contains(std::string_view w) const { return words_.count(std::string(w)) > 0; }
  std::size_t size() const { return words_.size(); }

 private:
  std::unordered_set<std::string> words_;
};

inline std::vector<std::string> drop_stopwords(std::span<const std::string> tokens, const StopwordSet& stop) {
  std::vector<std::string> out;
  out.reserve(tokens.size());
  for (const auto& t : tokens) {
    if (!stop.contains(t)) out.push_back(t);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Lemmatiser
// ---------------------------------------------------------------------------

// Dictionary lookup first; on a miss, conservative plural stripping; else
// the token itself.
class Lemmatizer {
 public:
  Lemmatizer() = default;
  explicit Lemmatizer(std::unordered_map<std::string, std::string> dict) : dict_(std::move(dict)) {}

  // `form<TAB>lemma` per line.
  static Lemmatizer parse(std::string_view content) {
    std::unordered_map<std::string, std::string> d;
    std::size_t line_no = 0;
    for (const auto& raw : split(content, '\n')) {
      ++line_no;
      const auto line = trim(raw);
      if (line.empty() || line.front() == '#') continue;
      const auto tab = line.find('\t');
      if (tab == std::string_view::npos) {
        throw ConfigError("lemma dictionary line " + std::to_string(line_no) + ": expected form<TAB>lemma");
      }
      d[to_lower_ascii(trim(line.substr(0, tab)))] = to_lower_ascii(trim(line.substr(tab + 1)));
    }
    return Lemmatizer(std::move(d));
  }

  static Lemmatizer load(const std::string& path) { return parse(read_file(path)); }

  std::string lemma(const std::string& token) const {
    if (auto it = dict_.find(token); it != dict_.end()) return it->second;
    return strip_suffix(token);
  }

  std::vector<std::string> operator()(std::span<const std::string> tokens) const {
    std::vector<std::string> out;
    out.reserve(tokens.size());
    for (const auto& t : tokens) out.push_back(lemma(t));
    return out;
  }

  std::size_t size() const { return dict_.size(); }

 private:
  static bool ends_with(const std::string& s, std::string_view suf) {
    return s.size() >= suf.size() && s.compare(s.size() - suf.size(), suf.size(), suf) == 0;
  }

  static bool all_alpha(const std::string& s) {
    for (char c : s) {
      if (!(c >= 'a' && c <= 'z')) return false;
    }
    return true;
  }

  static std::string strip_suffix(const std::string& t) {
    if (!all_alpha(t)) return t;
    if (t.size() > 4 && ends_with(t, "ies")) return t.substr(0, t.size() - 3) + "y";
    if (ends_with(t, "sses")) return t.substr(0, t.size() - 2);
    if (t.size() > 3 && ends_with(t, "s") && !ends_with(t, "ss") && !ends_with(t, "us") &&
        !ends_with(t, "is")) {
      return t.substr(0, t.size() - 1);
    }
    return t;
  }

  std::unordered_map<std::string, std::string> dict_;
};

inline std::vector<std::string> lemmatize(std::span<const std::string> tokens, const Lemmatizer& lem) {
  return lem(tokens);
}

// normalize -> tokenize -> drop stopwords -> lemmatize -> drop stopwords.
// The second pass catches lemmata that land on a stopword.
class Preprocessor {
 public:
  Preprocessor(StopwordSet stop, Lemmatizer lem) : stop_(std::move(stop)), lem_(std::move(lem)) {}

  std::vector<std::string> operator()(std::string_view text) const {
    const auto raw = drop_stopwords(tokenize(text), stop_);
    return drop_stopwords(lem_(raw), stop_);
  }

  const StopwordSet& stopwords() const { return stop_; }
  const Lemmatizer& lemmatizer() const { return lem_; }

 private:
  StopwordSet stop_;
  Lemmatizer lem_;
};

struct TokenDoc {
  std::size_t doc_id = 0;
  std::vector<std::string> tokens;
  std::string source_post_id;
};

// Removes "#tag" spans, leaving the post's main content.
inline std::string strip_hashtags(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  for (std::size_t i = 0; i < text.size();) {
    if (text[i] == '#' && i + 1 < text.size() && detail::is_word_byte(text[i + 1]) &&
        (i == 0 || !detail::is_word_byte(text[i - 1]))) {
      ++i;
      while (i < text.size() && detail::is_word_byte(text[i])) ++i;
      continue;
    }
    out.push_back(text[i++]);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Hashtag explosion
// ---------------------------------------------------------------------------

// One copy of the post per hashtag; copy i carries hashtags = {hashtags[i]}.
// All copies keep the source post_id.
inline std::vector<corpus::PostRecord> explode_by_hashtags(const corpus::PostRecord& record) {
  std::vector<corpus::PostRecord> out;
  out.reserve(record.hashtags.size());
  for (const auto& tag : record.hashtags) {
    corpus::PostRecord copy = record;
    copy.hashtags = {tag};
    out.push_back(std::move(copy));
  }
  return out;
}

}  // namespace privlens::textmodel
