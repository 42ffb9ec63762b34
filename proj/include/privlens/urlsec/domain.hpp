#pragma once

// URL host extraction, IDNA (punycode) normalisation and registered-domain
// lookup against the public suffix list.

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "privlens/corpus.hpp"
#include "privlens/util.hpp"

namespace privlens::urlsec {

// ---------------------------------------------------------------------------
// Punycode (RFC 3492, encoder only)
// ---------------------------------------------------------------------------

namespace punycode {

// Decodes UTF-8 into code points; nullopt on malformed input.
inline std::optional<std::u32string> utf8_decode(std::string_view s) {
  std::u32string out;
  for (std::size_t i = 0; i < s.size();) {
    const auto c = static_cast<unsigned char>(s[i]);
    char32_t cp;
    std::size_t len;
    if (c < 0x80) {
      cp = c;
      len = 1;
    } else if ((c & 0xE0) == 0xC0) {
      cp = c & 0x1F;
      len = 2;
    } else if ((c & 0xF0) == 0xE0) {
      cp = c & 0x0F;
      len = 3;
    } else if ((c & 0xF8) == 0xF0) {
      cp = c & 0x07;
      len = 4;
    } else {
      return std::nullopt;
    }
    if (i + len > s.size()) return std::nullopt;
    for (std::size_t k = 1; k < len; ++k) {
      const auto cc = static_cast<unsigned char>(s[i + k]);
      if ((cc & 0xC0) != 0x80) return std::nullopt;
      cp = (cp << 6) | (cc & 0x3F);
    }
    out.push_back(cp);
    i += len;
  }
  return out;
}

inline char encode_digit(std::uint32_t d) { return static_cast<char>(d < 26 ? 'a' + d : '0' + (d - 26)); }

inline std::uint32_t adapt(std::uint32_t delta, std::uint32_t numpoints, bool first) {
  constexpr std::uint32_t base = 36, tmin = 1, tmax = 26, skew = 38, damp = 700;
  delta = first ? delta / damp : delta / 2;
  delta += delta / numpoints;
  std::uint32_t k = 0;
  while (delta > ((base - tmin) * tmax) / 2) {
    delta /= base - tmin;
    k += base;
  }
  return k + (base - tmin + 1) * delta / (delta + skew);
}

// Punycode body for one label (without the "xn--" prefix).
inline std::optional<std::string> encode(const std::u32string& input) {
  constexpr std::uint32_t base = 36, tmin = 1, tmax = 26;
  std::string out;
  for (char32_t c : input) {
    if (c < 0x80) out.push_back(static_cast<char>(c));
  }
  const std::uint32_t b = static_cast<std::uint32_t>(out.size());
  std::uint32_t h = b;
  if (b > 0) out.push_back('-');
  std::uint32_t n = 0x80, delta = 0, bias = 72;
  while (h < input.size()) {
    std::uint32_t m = UINT32_MAX;
    for (char32_t c : input) {
      if (c >= n && c < m) m = c;
    }
    if ((m - n) > (UINT32_MAX - delta) / (h + 1)) return std::nullopt;
    delta += (m - n) * (h + 1);
    n = m;
    for (char32_t c : input) {
      if (c < n && ++delta == 0) return std::nullopt;
      if (c == n) {
        std::uint32_t q = delta;
        for (std::uint32_t k = base;; k += base) {
          const std::uint32_t t = k <= bias ? tmin : (k >= bias + tmax ? tmax : k - bias);
          if (q < t) break;
          out.push_back(encode_digit(t + (q - t) % (base - t)));
          q = (q - t) / (base - t);
        }
        out.push_back(encode_digit(q));
        bias = adapt(delta, h + 1, h == b);
        delta = 0;
        ++h;
      }
    }
    ++delta;
    ++n;
  }
  return out;
}

}  // namespace punycode

// Lowercases ASCII and converts labels holding non-ASCII characters to
// their "xn--" form. nullopt when the host is not valid UTF-8.
inline std::optional<std::string> normalize_host(std::string_view host) {
  std::string out;
  for (const auto& label : split(host, '.')) {
    bool ascii = true;
    for (char c : label) ascii = ascii && static_cast<unsigned char>(c) < 0x80;
    std::string norm;
    if (ascii) {
      norm = to_lower_ascii(label);
    } else {
      auto cps = punycode::utf8_decode(label);
      if (!cps) return std::nullopt;
      for (auto& cp : *cps) {
        if (cp >= U'A' && cp <= U'Z') cp = cp - U'A' + U'a';
      }
      auto enc = punycode::encode(*cps);
      if (!enc) return std::nullopt;
      norm = "xn--" + *enc;
    }
    out += norm;
    out.push_back('.');
  }
  if (!out.empty()) out.pop_back();
  return out;
}

// ---------------------------------------------------------------------------
// URLs
// ---------------------------------------------------------------------------

struct ParsedUrl {
  std::string scheme;
  std::string host;  // as written (brackets kept for IPv6)
  std::optional<std::uint16_t> port;
  std::string rest;  // path, query and fragment
};

// Absolute URL of the form scheme://[userinfo@]host[:port][/...]. nullopt
// for anything else.
inline std::optional<ParsedUrl> parse_url(std::string_view url) {
  url = trim(url);
  const auto colon = url.find("://");
  if (colon == std::string_view::npos || colon == 0) return std::nullopt;
  for (std::size_t i = 0; i < colon; ++i) {
    const char c = url[i];
    const bool alpha = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z');
    if (!(alpha || (i > 0 && ((c >= '0' && c <= '9') || c == '+' || c == '-' || c == '.')))) return std::nullopt;
  }
  ParsedUrl p;
  p.scheme = to_lower_ascii(url.substr(0, colon));
  std::string_view rest = url.substr(colon + 3);
  const auto end = rest.find_first_of("/?#");
  std::string_view authority = rest.substr(0, end);
  p.rest = end == std::string_view::npos ? "" : std::string(rest.substr(end));
  if (const auto at = authority.rfind('@'); at != std::string_view::npos) authority = authority.substr(at + 1);
  if (authority.empty()) return std::nullopt;
  std::string_view host = authority;
  std::string_view port;
  if (authority.front() == '[') {
    const auto close = authority.find(']');
    if (close == std::string_view::npos) return std::nullopt;
    host = authority.substr(0, close + 1);
    const auto after = authority.substr(close + 1);
    if (!after.empty()) {
      if (after.front() != ':') return std::nullopt;
      port = after.substr(1);
    }
  } else if (const auto c = authority.rfind(':'); c != std::string_view::npos) {
    host = authority.substr(0, c);
    port = authority.substr(c + 1);
  }
  if (host.empty()) return std::nullopt;
  for (char ch : host) {
    if (ch == ' ' || ch == '\t' || ch == '%' || ch == '\\' || ch == '<' || ch == '>' || ch == '"') return std::nullopt;
  }
  if (!port.empty()) {
    auto v = parse_int(port);
    if (!v || *v < 0 || *v > 65535) return std::nullopt;
    p.port = static_cast<std::uint16_t>(*v);
  }
  p.host = std::string(host);
  if (p.host.back() == '.') p.host.pop_back();  // absolute FQDN
  if (p.host.empty() || p.host.find("..") != std::string::npos || p.host.front() == '.') return std::nullopt;
  return p;
}

inline bool is_ipv4(std::string_view host) {
  const auto parts = split(host, '.');
  if (parts.size() != 4) return false;
  for (const auto& p : parts) {
    if (p.empty() || p.size() > 3) return false;
    for (char c : p) {
      if (c < '0' || c > '9') return false;
    }
    if (std::stoi(p) > 255) return false;
  }
  return true;
}

inline bool is_ip_literal(std::string_view host) {
  return (!host.empty() && host.front() == '[') || is_ipv4(host);
}

struct UrlExtraction {
  std::vector<std::string> urls;
  std::size_t dropped = 0;
};

// Expanded URLs of a record verbatim; syntactically invalid ones are dropped
// and counted.
inline UrlExtraction extract_urls(const corpus::PostRecord& record) {
  UrlExtraction out;
  for (const auto& u : record.urls) {
    if (parse_url(u)) {
      out.urls.push_back(u);
    } else {
      ++out.dropped;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Public suffix list
// ---------------------------------------------------------------------------

class PublicSuffixList {
 public:
  // Standard list format: one rule per line, "//" comments, "*." wildcard
  // labels and "!" exception rules. Unicode rules are stored in punycode.
  static PublicSuffixList parse(std::string_view content) {
    PublicSuffixList psl;
    for (const auto& raw : split(content, '\n')) {
      auto line = trim(raw);
      if (line.empty() || line.substr(0, 2) == "//") continue;
      const auto ws = line.find_first_of(" \t");
      if (ws != std::string_view::npos) line = line.substr(0, ws);
      bool exception = false;
      if (line.front() == '!') {
        exception = true;
        line.remove_prefix(1);
      }
      bool wildcard = false;
      if (line.substr(0, 2) == "*.") {
        wildcard = true;
        line.remove_prefix(2);
      }
      auto norm = normalize_host(line);
      if (!norm || norm->empty()) continue;
      auto& r = psl.rules_[*norm];
      if (exception) r.exception = true;
      else if (wildcard) r.wildcard = true;
      else r.normal = true;
    }
    return psl;
  }

  static PublicSuffixList load(const std::string& path) { return parse(read_file(path)); }

  std::size_t size() const { return rules_.size(); }

  // Public suffix of a normalised host, by the list's algorithm: an
  // exception rule wins; otherwise the matching rule with the most labels;
  // otherwise the implicit "*" rule (the last label).
  std::string public_suffix(const std::string& host) const {
    const auto labels = split(host, '.');
    const std::size_t n = labels.size();
    // suffix made of the last k labels
    auto suffix = [&](std::size_t k) {
      std::string s;
      for (std::size_t i = n - k; i < n; ++i) {
        if (!s.empty()) s.push_back('.');
        s += labels[i];
      }
      return s;
    };
    std::size_t best = 1;
    for (std::size_t k = 1; k <= n; ++k) {
      const auto it = rules_.find(suffix(k));
      if (it == rules_.end()) continue;
      if (it->second.exception) return suffix(k - 1);
      if (it->second.normal) best = std::max(best, k);
      if (it->second.wildcard && k + 1 <= n) {
        // *.rule matches one extra label, unless that name is an exception.
        const auto ex = rules_.find(suffix(k + 1));
        if (ex != rules_.end() && ex->second.exception) return suffix(k);
        best = std::max(best, k + 1);
      } else if (it->second.wildcard) {
        best = std::max(best, k);
      }
    }
    return suffix(std::min(best, n));
  }

 private:
  struct Rule {
    bool normal = false;
    bool wildcard = false;  // "*.<key>"
    bool exception = false;  // "!<key>"
  };
  std::unordered_map<std::string, Rule> rules_;
};

struct RegisteredDomain {
  std::string host;        // normalised
  std::string registered;  // public suffix + one label
  std::string suffix;
};

// Result of registered_domain(): a domain, or an IP-literal host that has
// none.
struct DomainResult {
  std::optional<RegisteredDomain> domain;
  bool ip_literal = false;
  std::string host;
};

inline DomainResult registered_domain(std::string_view url, const PublicSuffixList& psl) {
  const auto parsed = parse_url(url);
  if (!parsed) throw Error("invalid URL '" + std::string(url) + "'");
  DomainResult out;
  if (is_ip_literal(parsed->host)) {
    out.ip_literal = true;
    out.host = to_lower_ascii(parsed->host);
    return out;
  }
  const auto host = normalize_host(parsed->host);
  if (!host) throw Error("host is not valid UTF-8 in '" + std::string(url) + "'");
  out.host = *host;
  const auto suffix = psl.public_suffix(*host);
  if (suffix.size() >= host->size()) throw Error("no registrable part in host '" + *host + "'");
  const auto head = host->substr(0, host->size() - suffix.size() - 1);
  const auto dot = head.rfind('.');
  const auto label = dot == std::string::npos ? head : head.substr(dot + 1);
  out.domain = RegisteredDomain{*host, label + "." + suffix, suffix};
  return out;
}

}  // namespace privlens::urlsec
