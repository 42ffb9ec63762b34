#pragma once

// Live scanner client for the VirusTotal v3 domain endpoint. Needs
// CPPHTTPLIB_OPENSSL_SUPPORT and linking against OpenSSL; the rest of the
// library works offline against report caches.

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <functional>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "json.hpp"
#include "privlens/urlsec/reports.hpp"
#include "privlens/util.hpp"

#ifdef CPPHTTPLIB_OPENSSL_SUPPORT
#include "httplib.h"
#endif

namespace privlens::urlsec {

inline constexpr const char* kApiKeyEnv = "VT_API_KEY";

// Reads the API key; live mode without one is fatal.
inline std::string api_key_from_env(const char* var = kApiKeyEnv) {
  const char* v = std::getenv(var);
  if (!v || !*v) throw ConfigError(std::string("live scanner mode requires the ") + var + " environment variable");
  return v;
}

// Token bucket refilled continuously at `per_minute` tokens per minute,
// capacity `burst`. Thread-safe.
class RateLimiter {
 public:
  using Clock = std::chrono::steady_clock;

  explicit RateLimiter(double per_minute, double burst = 1.0)
      : rate_(per_minute / 60.0), capacity_(std::max(1.0, burst)), tokens_(capacity_), last_(Clock::now()) {
    if (!(per_minute > 0.0)) throw ConfigError("requests per minute must be positive");
  }

  // Seconds the caller has to wait before its request may go out; takes
  // the token.
  double reserve() {
    std::lock_guard lock(mu_);
    const auto now = Clock::now();
    tokens_ = std::min(capacity_, tokens_ + std::chrono::duration<double>(now - last_).count() * rate_);
    last_ = now;
    tokens_ -= 1.0;
    return tokens_ >= 0.0 ? 0.0 : -tokens_ / rate_;
  }

  void acquire() {
    const double wait = reserve();
    if (wait > 0.0) std::this_thread::sleep_for(std::chrono::duration<double>(wait));
  }

 private:
  std::mutex mu_;
  double rate_;  // tokens per second
  double capacity_;
  double tokens_;
  Clock::time_point last_;
};

struct HttpReply {
  int status = 0;
  std::string body;
};

struct BackoffOptions {
  int max_retries = 5;
  double initial_seconds = 1.0;
  double max_seconds = 60.0;
};

// GET with bounded exponential backoff on 429. Throws RateLimited when the
// retries run out and Error on any other failure.
inline HttpReply get_with_backoff(const std::function<HttpReply()>& get, const BackoffOptions& opts,
                                  const std::function<void(double)>& sleep) {
  double delay = opts.initial_seconds;
  for (int attempt = 0;; ++attempt) {
    auto r = get();
    if (r.status != 429) return r;
    if (attempt >= opts.max_retries) {
      throw RateLimited("rate limited after " + std::to_string(opts.max_retries) + " retries");
    }
    sleep(delay);
    delay = std::min(delay * 2.0, opts.max_seconds);
  }
}

// Domain object of the v3 API -> one report dated at its last analysis.
// positives = malicious + suspicious engines; total = all engines listed.
inline std::vector<ScanReport> parse_domain_object(const std::string& domain, const std::string& body) {
  const auto j = nlohmann::json::parse(body, nullptr, false);
  if (j.is_discarded()) throw Error("malformed scanner response for " + domain);
  const auto attrs = j.value("data", nlohmann::json::object()).value("attributes", nlohmann::json::object());
  if (!attrs.contains("last_analysis_stats") || !attrs.contains("last_analysis_date")) return {};
  const auto& stats = attrs["last_analysis_stats"];
  std::int64_t total = 0;
  for (const auto& [k, v] : stats.items()) {
    if (v.is_number_integer()) total += v.get<std::int64_t>();
  }
  if (total < 1) return {};
  ScanReport r;
  r.domain = domain;
  r.positives = stats.value("malicious", 0) + stats.value("suspicious", 0);
  r.total = total;
  r.date = Timestamp(attrs["last_analysis_date"].get<std::int64_t>()).date();
  return {r};
}

// Most frequent engine-assigned category; ties lexicographic.
inline std::optional<std::string> parse_domain_category(const std::string& body) {
  const auto j = nlohmann::json::parse(body, nullptr, false);
  if (j.is_discarded()) throw Error("malformed scanner response");
  const auto attrs = j.value("data", nlohmann::json::object()).value("attributes", nlohmann::json::object());
  if (!attrs.contains("categories") || !attrs["categories"].is_object()) return std::nullopt;
  std::map<std::string, int> votes;
  for (const auto& [engine, cat] : attrs["categories"].items()) {
    if (cat.is_string()) ++votes[cat.get<std::string>()];
  }
  std::optional<std::string> best;
  int best_n = 0;
  for (const auto& [cat, n] : votes) {
    if (n > best_n) {
      best = cat;
      best_n = n;
    }
  }
  return best;
}

struct VtClientOptions {
  std::string host = "https://www.virustotal.com";
  double requests_per_minute = 4.0;
  BackoffOptions backoff;
};

// Transport performing GET <path> with the given API key.
using HttpGet = std::function<HttpReply(const std::string& path, const std::string& api_key)>;

#ifdef CPPHTTPLIB_OPENSSL_SUPPORT
inline HttpGet https_get(const std::string& host) {
  return [host](const std::string& path, const std::string& key) {
    httplib::Client cli(host);
    cli.set_connection_timeout(10);
    cli.set_read_timeout(30);
    auto res = cli.Get(path, httplib::Headers{{"x-apikey", key}, {"accept", "application/json"}});
    if (!res) throw Error("request to " + host + path + " failed: " + httplib::to_string(res.error()));
    return HttpReply{res->status, res->body};
  };
}
#endif

class VtClient : public ReportClient, public CategoryClient {
 public:
  VtClient(std::string api_key, HttpGet get, VtClientOptions opts = {},
           std::function<void(double)> sleep = [](double s) {
             std::this_thread::sleep_for(std::chrono::duration<double>(s));
           })
      : key_(std::move(api_key)),
        get_(std::move(get)),
        opts_(std::move(opts)),
        limiter_(opts_.requests_per_minute),
        sleep_(std::move(sleep)) {}

  std::vector<ScanReport> fetch(const std::string& domain) override {
    return parse_domain_object(domain, domain_object(domain));
  }

  std::optional<std::string> lookup(const std::string& domain) override {
    return parse_domain_category(domain_object(domain));
  }

 private:
  std::string domain_object(const std::string& domain) {
    const auto path = "/api/v3/domains/" + domain;
    auto reply = get_with_backoff(
        [&] {
          const double wait = limiter_.reserve();
          if (wait > 0.0) sleep_(wait);
          return get_(path, key_);
        },
        opts_.backoff, sleep_);
    if (reply.status == 404) return "{}";
    if (reply.status != 200) throw Error("scanner returned HTTP " + std::to_string(reply.status) + " for " + domain);
    return reply.body;
  }

  std::string key_;
  HttpGet get_;
  VtClientOptions opts_;
  RateLimiter limiter_;
  std::function<void(double)> sleep_;
};

}  // namespace privlens::urlsec
