#include <gtest/gtest.h>

#include <optional>

#include "privlens/urlsec/domain.hpp"
#include "support.hpp"

using namespace privlens;
using namespace privlens::urlsec;

namespace {

const PublicSuffixList& shipped_psl() {
  static const auto psl = PublicSuffixList::load((testsupport::data_dir() / "public_suffix_list.dat").string());
  return psl;
}

// Registered domain of a bare host, nullopt when the host has none.
std::optional<std::string> reg(const std::string& host) {
  try {
    const auto r = registered_domain("http://" + host + "/", shipped_psl());
    if (!r.domain) return std::nullopt;
    return r.domain->registered;
  } catch (const Error&) {
    return std::nullopt;
  }
}

std::optional<std::string> idn(const std::string& host) { return normalize_host(host); }

}  // namespace

TEST(Punycode, MatchesReferenceCodec) {
  // Expected values from Python's built-in "punycode" codec.
  auto enc = [](const std::string& s) { return punycode::encode(*punycode::utf8_decode(s)); };
  EXPECT_EQ(enc("bücher"), "bcher-kva");
  EXPECT_EQ(enc("münchen"), "mnchen-3ya");
  EXPECT_EQ(enc("公司"), "55qx5d");
  EXPECT_EQ(enc("食狮"), "85x722f");
  EXPECT_EQ(enc("правительство"), "80aealotwbjpid2k");
  EXPECT_FALSE(punycode::utf8_decode("\xc3"));
}

TEST(NormalizeHost, LowercasesAndEncodes) {
  EXPECT_EQ(normalize_host("WWW.Example.COM"), "www.example.com");
  EXPECT_EQ(normalize_host("Bücher.example"), "xn--bcher-kva.example");
  EXPECT_FALSE(normalize_host("bad\xff.com"));
}

TEST(ParseUrl, HostPortAndRejects) {
  const auto p = parse_url("HTTPS://user:pw@Sub.Example.com:8443/path?q=1#f");
  ASSERT_TRUE(p);
  EXPECT_EQ(p->scheme, "https");
  EXPECT_EQ(p->host, "Sub.Example.com");
  EXPECT_EQ(p->port, 8443);
  EXPECT_EQ(p->rest, "/path?q=1#f");
  EXPECT_EQ(parse_url("http://example.com.")->host, "example.com");
  EXPECT_EQ(parse_url("http://[::1]:80/")->host, "[::1]");
  EXPECT_FALSE(parse_url("example.com/path"));
  EXPECT_FALSE(parse_url("http://"));
  EXPECT_FALSE(parse_url("http://exa mple.com"));
  EXPECT_FALSE(parse_url("http://example.com:99999/"));
  EXPECT_FALSE(parse_url("http://a..b/"));
  EXPECT_FALSE(parse_url("1http://example.com"));
}

TEST(PublicSuffix, OfficialTestVectors) {
  // Cases from the public suffix list project's test_psl.txt.
  EXPECT_EQ(reg("example.com"), "example.com");
  EXPECT_EQ(reg("b.example.com"), "example.com");
  EXPECT_EQ(reg("a.b.example.com"), "example.com");
  EXPECT_EQ(reg("uk.com"), std::nullopt);
  EXPECT_EQ(reg("example.uk.com"), "example.uk.com");
  EXPECT_EQ(reg("b.example.uk.com"), "example.uk.com");
  EXPECT_EQ(reg("test.ac"), "test.ac");
  EXPECT_EQ(reg("c.mm"), std::nullopt);
  EXPECT_EQ(reg("b.c.mm"), "b.c.mm");
  EXPECT_EQ(reg("jp"), std::nullopt);
  EXPECT_EQ(reg("www.test.jp"), "test.jp");
  EXPECT_EQ(reg("ac.jp"), std::nullopt);
  EXPECT_EQ(reg("test.ac.jp"), "test.ac.jp");
  EXPECT_EQ(reg("kyoto.jp"), std::nullopt);
  EXPECT_EQ(reg("ide.kyoto.jp"), std::nullopt);
  EXPECT_EQ(reg("b.ide.kyoto.jp"), "b.ide.kyoto.jp");
  EXPECT_EQ(reg("c.kobe.jp"), std::nullopt);
  EXPECT_EQ(reg("b.c.kobe.jp"), "b.c.kobe.jp");
  EXPECT_EQ(reg("city.kobe.jp"), "city.kobe.jp");
  EXPECT_EQ(reg("www.city.kobe.jp"), "city.kobe.jp");
  EXPECT_EQ(reg("test.ck"), std::nullopt);
  EXPECT_EQ(reg("b.test.ck"), "b.test.ck");
  EXPECT_EQ(reg("a.b.test.ck"), "b.test.ck");
  EXPECT_EQ(reg("www.ck"), "www.ck");
  EXPECT_EQ(reg("www.www.ck"), "www.ck");
  EXPECT_EQ(reg("k12.ak.us"), std::nullopt);
  EXPECT_EQ(reg("test.k12.ak.us"), "test.k12.ak.us");
  EXPECT_EQ(reg("www.test.k12.ak.us"), "test.k12.ak.us");
}

TEST(PublicSuffix, InternationalisedNames) {
  EXPECT_EQ(reg("食狮.com.cn"), idn("食狮.com.cn"));
  EXPECT_EQ(reg("食狮.公司.cn"), idn("食狮.公司.cn"));
  EXPECT_EQ(reg("www.食狮.公司.cn"), idn("食狮.公司.cn"));
  EXPECT_EQ(reg("shishi.公司.cn"), idn("shishi.公司.cn"));
  EXPECT_EQ(reg("公司.cn"), std::nullopt);
  EXPECT_EQ(reg("食狮.中国"), idn("食狮.中国"));
  EXPECT_EQ(reg("中国"), std::nullopt);
  EXPECT_EQ(reg("www.xn--85x722f.xn--55qx5d.cn"), "xn--85x722f.xn--55qx5d.cn");
}

TEST(PublicSuffix, ImplicitRuleAndSmallList) {
  const auto psl = PublicSuffixList::parse("// comment\ncom\n*.example\n!keep.example\n");
  EXPECT_EQ(psl.public_suffix("a.b.com"), "com");
  EXPECT_EQ(psl.public_suffix("x.y.example"), "y.example");
  EXPECT_EQ(psl.public_suffix("x.keep.example"), "example");
  EXPECT_EQ(psl.public_suffix("foo.unlisted"), "unlisted");
}

TEST(RegisteredDomain, IpLiteralsHaveNone) {
  const auto& psl = shipped_psl();
  const auto v4 = registered_domain("http://203.0.113.7/login", psl);
  EXPECT_TRUE(v4.ip_literal);
  EXPECT_FALSE(v4.domain);
  EXPECT_EQ(v4.host, "203.0.113.7");
  EXPECT_TRUE(registered_domain("http://[2001:db8::1]/", psl).ip_literal);
  EXPECT_FALSE(is_ipv4("256.1.1.1"));
  EXPECT_THROW(registered_domain("not a url", psl), Error);
}

TEST(ExtractUrls, DropsInvalid) {
  corpus::PostRecord r;
  r.urls = {"https://example.com/a", "www.example.com", "http://ok.org"};
  const auto e = extract_urls(r);
  EXPECT_EQ(e.urls, (std::vector<std::string>{"https://example.com/a", "http://ok.org"}));
  EXPECT_EQ(e.dropped, 1u);
}
