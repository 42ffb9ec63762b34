#pragma once

// Gazetteer-driven PII detection (names, locations, organisations).

#include <algorithm>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "privlens/util.hpp"

namespace privlens::privacy {

enum class PiiKind { Name, Location, Organisation };

inline const char* pii_kind_name(PiiKind k) {
  switch (k) {
    case PiiKind::Name: return "Name";
    case PiiKind::Location: return "Location";
    case PiiKind::Organisation: return "Organisation";
  }
  return "Name";
}

struct PiiAnnotation {
  std::size_t start = 0;  // byte offsets, [start, end)
  std::size_t end = 0;
  PiiKind kind = PiiKind::Name;
  std::string surface;

  bool operator==(const PiiAnnotation&) const = default;
};

namespace detail {

struct Token {
  std::size_t start;
  std::size_t end;
  std::string text;
};

inline bool is_token_byte(char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '\'' ||
         c == '-' || static_cast<unsigned char>(c) >= 0x80;
}

inline std::vector<Token> pii_tokens(std::string_view text) {
  std::vector<Token> out;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && !is_token_byte(text[i])) ++i;
    std::size_t j = i;
    while (j < text.size() && is_token_byte(text[j])) ++j;
    // Trailing apostrophes/hyphens are punctuation; a possessive "'s" is
    // split off so "Cairo's" yields "Cairo".
    while (j > i && (text[j - 1] == '\'' || text[j - 1] == '-')) --j;
    if (j >= i + 3 && text[j - 2] == '\'' && (text[j - 1] == 's' || text[j - 1] == 'S')) j -= 2;
    if (j > i) out.push_back({i, j, std::string(text.substr(i, j - i))});
    i = std::max(j, i + 1);
  }
  return out;
}

inline bool starts_upper(const std::string& s) { return !s.empty() && s[0] >= 'A' && s[0] <= 'Z'; }

}  // namespace detail

// Entries are matched token-wise. A match is accepted when the text tokens
// equal the entry exactly, or equal it ignoring ASCII case while every
// matched token is capitalised. Lowercase common nouns never hit
// capitalised entries.
class Gazetteers {
 public:
  void add(PiiKind kind, std::string_view entry) {
    auto toks = detail::pii_tokens(entry);
    if (toks.empty()) return;
    std::vector<std::string> words;
    for (auto& t : toks) words.push_back(std::move(t.text));
    std::string key = to_lower_ascii(words.front());
    max_len_ = std::max(max_len_, words.size());
    entries_[key].push_back({std::move(words), kind});
  }

  // One entry per line, UTF-8; '#' starts a comment line.
  void load(PiiKind kind, const std::string& path) { add_lines(kind, read_file(path)); }

  void add_lines(PiiKind kind, std::string_view content) {
    for (const auto& raw : split(content, '\n')) {
      const auto line = trim(raw);
      if (line.empty() || line.front() == '#') continue;
      add(kind, line);
    }
  }

  std::size_t max_entry_tokens() const { return max_len_; }

  struct Entry {
    std::vector<std::string> words;
    PiiKind kind;
  };

  const std::vector<Entry>* candidates(const std::string& first_token) const {
    auto it = entries_.find(to_lower_ascii(first_token));
    return it == entries_.end() ? nullptr : &it->second;
  }

  bool empty() const { return entries_.empty(); }

 private:
  std::map<std::string, std::vector<Entry>> entries_;
  std::size_t max_len_ = 0;
};

// All candidate matches are collected, then accepted longest-first and,
// among equal lengths, leftmost-first, skipping any that overlap an
// accepted span. Result is ordered by start offset.
inline std::vector<PiiAnnotation> detect_pii(std::string_view text, const Gazetteers& gaz) {
  const auto toks = detail::pii_tokens(text);
  struct Candidate {
    std::size_t first_tok, n_tok;
    PiiKind kind;
  };
  std::vector<Candidate> cands;
  for (std::size_t i = 0; i < toks.size(); ++i) {
    const auto* entries = gaz.candidates(toks[i].text);
    if (!entries) continue;
    for (const auto& e : *entries) {
      if (i + e.words.size() > toks.size()) continue;
      bool exact = true, folded = true, capitalised = true;
      for (std::size_t k = 0; k < e.words.size(); ++k) {
        const auto& t = toks[i + k].text;
        if (t != e.words[k]) exact = false;
        if (to_lower_ascii(t) != to_lower_ascii(e.words[k])) folded = false;
        if (!detail::starts_upper(t)) capitalised = false;
      }
      // An exact hit on an all-lowercase entry still needs no capital.
      const bool entry_capitalised = detail::starts_upper(e.words.front());
      if ((exact && (capitalised || !entry_capitalised)) || (folded && capitalised)) {
        cands.push_back({i, e.words.size(), e.kind});
      }
    }
  }
  std::stable_sort(cands.begin(), cands.end(), [&](const Candidate& a, const Candidate& b) {
    const std::size_t la = toks[a.first_tok + a.n_tok - 1].end - toks[a.first_tok].start;
    const std::size_t lb = toks[b.first_tok + b.n_tok - 1].end - toks[b.first_tok].start;
    if (la != lb) return la > lb;
    if (a.first_tok != b.first_tok) return a.first_tok < b.first_tok;
    return static_cast<int>(a.kind) < static_cast<int>(b.kind);
  });
  std::vector<bool> taken(toks.size(), false);
  std::vector<PiiAnnotation> out;
  for (const auto& c : cands) {
    bool free = true;
    for (std::size_t k = c.first_tok; k < c.first_tok + c.n_tok; ++k) free = free && !taken[k];
    if (!free) continue;
    for (std::size_t k = c.first_tok; k < c.first_tok + c.n_tok; ++k) taken[k] = true;
    const std::size_t s = toks[c.first_tok].start, e = toks[c.first_tok + c.n_tok - 1].end;
    out.push_back({s, e, c.kind, std::string(text.substr(s, e - s))});
  }
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.start < b.start; });
  return out;
}

// Text with every annotated span removed (used to measure the PII effect).
inline std::string strip_pii(std::string_view text, const std::vector<PiiAnnotation>& anns) {
  std::string out;
  std::size_t pos = 0;
  for (const auto& a : anns) {
    out.append(text.substr(pos, a.start - pos));
    pos = a.end;
  }
  out.append(text.substr(pos));
  return out;
}

}  // namespace privlens::privacy
