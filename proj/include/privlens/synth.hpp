#pragma once

// Deterministic synthetic corpora: topic-driven posts with hashtags, URLs,
// gazetteer PII and a heavy-tailed posts-per-user distribution, plus a
// manifest of everything that was generated and a matching scanner-report
// cache.

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "json.hpp"
#include "privlens/corpus.hpp"
#include "privlens/urlsec/reports.hpp"
#include "privlens/util.hpp"

namespace privlens::synth {

struct Theme {
  const char* name;
  std::vector<const char*> words;
  std::vector<const char*> hashtags;
};

inline const std::vector<Theme>& themes() {
  static const std::vector<Theme> t = {
      {"support business",
       {"support", "local", "business", "small", "shop", "restaurant", "cafe", "fundraising", "charity", "donate",
        "owner", "community"},
       {"fundraising", "charities", "supportlocal", "smallbusiness", "our_work_is_our_identity"}},
      {"politics",
       {"government", "minister", "election", "policy", "parliament", "president", "vote", "opposition", "leader",
        "senate", "campaign", "party"},
       {"BorisJohnson", "Trump", "PM", "auspol", "politics"}},
      {"latest updates",
       {"live", "update", "news", "watch", "breaking", "report", "today", "latest", "announcement", "press",
        "briefing", "headline"},
       {"LIVE", "WATCH", "currentaffairs", "breaking"}},
      {"vaccination",
       {"vaccine", "dose", "jab", "vaccination", "appointment", "booster", "pfizer", "shot", "clinic", "immunity",
        "rollout", "trial"},
       {"vaccine", "getvaccinated", "covidvaccine", "vaccinated"}},
      {"stay home",
       {"stay", "home", "safe", "family", "indoors", "house", "quarantine", "isolate", "kids", "couch", "movie",
        "garden"},
       {"stayhome", "StayHomeStaySafe", "stayathome"}},
      {"mask wearing",
       {"mask", "wear", "face", "covering", "protect", "mandate", "cloth", "public", "transport", "filter",
        "surgical", "nose"},
       {"wearamask", "masks", "facemask"}},
      {"pcr testing",
       {"test", "testing", "pcr", "result", "positive", "negative", "queue", "swab", "centre", "drive", "lab",
        "sample"},
       {"testing", "pcr", "gettested"}},
      {"lockdown",
       {"lockdown", "restriction", "curfew", "rule", "ease", "extend", "week", "order", "police", "travel",
        "border", "closure"},
       {"lockdown", "lockdown2020", "lockdownextension"}},
      {"sports",
       {"game", "match", "team", "season", "football", "cricket", "player", "league", "fan", "stadium", "coach",
        "goal"},
       {"sport", "cricket", "football"}},
      {"closing schools",
       {"school", "student", "teacher", "class", "online", "learning", "exam", "parent", "remote", "university",
        "homework", "campus"},
       {"schools", "onlinelearning", "education"}},
      {"stock prices",
       {"stock", "market", "price", "share", "trade", "investor", "economy", "dollar", "index", "bank", "profit",
        "crash"},
       {"stocks", "markets", "economy"}},
      {"human rights",
       {"rights", "freedom", "protest", "justice", "human", "worker", "equality", "law", "citizen", "court",
        "march", "union"},
       {"humanrights", "protest", "justice"}},
  };
  return t;
}

inline const std::vector<const char*>& positive_words() {
  static const std::vector<const char*> w = {"great", "good", "love", "happy", "thank", "hope",
                                             "proud", "amazing", "wonderful", "glad"};
  return w;
}

inline const std::vector<const char*>& negative_words() {
  static const std::vector<const char*> w = {"bad", "sad", "terrible", "angry", "death", "fear",
                                             "crisis", "worst", "hate", "sick"};
  return w;
}

inline const std::vector<const char*>& filler_words() {
  static const std::vector<const char*> w = {"the", "is", "we", "and", "to", "a", "of", "this", "for", "our",
                                             "covid", "coronavirus", "COVID-19"};
  return w;
}

// Gazetteer entries; the generator only emits these capitalised.
inline const std::vector<const char*>& names() {
  static const std::vector<const char*> w = {"Miha", "Priya", "Oliver", "Amelia", "Rahul", "Charlotte", "Jack",
                                             "Isla", "Arjun", "Grace", "Noah", "Sofia"};
  return w;
}

inline const std::vector<const char*>& locations() {
  static const std::vector<const char*> w = {"Cairo", "Melbourne", "Sydney", "Mumbai", "Delhi", "London",
                                             "Manchester", "New York", "Chicago", "Perth", "Bali", "Paris"};
  return w;
}

inline const std::vector<const char*>& organisations() {
  static const std::vector<const char*> w = {"Apple", "Qantas", "Infosys", "Tesco", "Google", "Woolworths",
                                             "Amazon", "NHS", "Microsoft", "Tata"};
  return w;
}

struct DomainSpec {
  const char* url;       // URL as shared
  const char* domain;    // registered domain ("" for IP literals)
  const char* category;  // category-map entry ("" leaves it unmapped)
  int positives;         // typical scanner positives
};

inline const std::vector<DomainSpec>& domains() {
  static const std::vector<DomainSpec> d = {
      {"https://twitter.com/i/web/status/1", "twitter.com", "Social Networks", 0},
      {"https://www.facebook.com/groups/local", "facebook.com", "Social Networks", 0},
      {"https://www.instagram.com/p/abc/", "instagram.com", "Social Networks", 0},
      {"https://www.youtube.com/watch?v=x1", "youtube.com", "Streaming Media", 0},
      {"https://subscribe.theepochtimes.com/p/", "theepochtimes.com", "News and Media", 1},
      {"https://theconversation.com/lockdown-123", "theconversation.com", "News and Media", 0},
      {"https://ncbi.nlm.nih.gov/pmc/articles/1", "nih.gov", "Health and Wellness", 0},
      {"https://www.bbc.co.uk/news/uk-1", "bbc.co.uk", "News and Media", 0},
      {"https://www.abc.net.au/news/2020", "abc.net.au", "News and Media", 0},
      {"https://www.ndtv.com/india-news/x", "ndtv.com", "News and Media", 0},
      {"https://www.nytimes.com/2020/04/01/us", "nytimes.com", "News and Media", 0},
      {"https://gofundme.com/f/help-cafe", "gofundme.com", "Charitable Organizations", 0},
      {"https://covid-relief-fund.xyz/claim", "covid-relief-fund.xyz", "Phishing", 14},
      {"http://free-masks-offer.top/order", "free-masks-offer.top", "Malicious Websites", 24},
      {"https://vaccine-cert-verify.info/login", "vaccine-cert-verify.info", "Phishing", 45},
      {"https://crypto-doubler.io/?ref=1", "crypto-doubler.io", "Information Technology", 60},
      {"https://bit.ly/3abcdE", "bit.ly", "URL Shortening", 4},
      {"https://stay-home-games.com/play", "stay-home-games.com", "", 3},
      {"http://203.0.113.7/pay", "", "", 0},
  };
  return d;
}

struct SynthOptions {
  std::size_t posts = 1000;
  std::size_t users = 250;
  std::uint64_t seed = 2020;
  double zipf_exponent = 1.1;
  double pii_rate = 0.15;
  double url_rate = 0.35;
  double repeat_rate = 0.3;  // user re-posts one of their earlier texts
  double off_filter_rate = 0.08;  // other country, other language or missing geo
  double outside_window_rate = 0.04;
};

struct SynthCorpus {
  std::vector<corpus::PostRecord> records;
  nlohmann::ordered_json manifest;
};

inline std::vector<corpus::PeriodWindow> table2_windows() {
  using corpus::Phase;
  auto w = [](const char* c, Phase p, Date a, Date b) { return corpus::PeriodWindow{c, p, a, b}; };
  return {
      w("Australia", Phase::Before, Date(2020, 3, 5), Date(2020, 3, 20)),
      w("Australia", Phase::During, Date(2020, 3, 21), Date(2020, 5, 15)),
      w("Australia", Phase::After, Date(2020, 5, 16), Date(2020, 6, 1)),
      w("Australia", Phase::Before, Date(2020, 6, 21), Date(2020, 7, 6)),
      w("Australia", Phase::During, Date(2020, 7, 7), Date(2020, 10, 19)),
      w("Australia", Phase::After, Date(2020, 10, 20), Date(2020, 11, 5)),
      w("India", Phase::Before, Date(2020, 2, 24), Date(2020, 3, 23)),
      w("India", Phase::During, Date(2020, 3, 24), Date(2020, 5, 31)),
      w("India", Phase::After, Date(2020, 6, 1), Date(2020, 6, 30)),
      w("US", Phase::Before, Date(2020, 2, 29), Date(2020, 3, 28)),
      w("US", Phase::During, Date(2020, 3, 29), Date(2020, 4, 28)),
      w("US", Phase::After, Date(2020, 4, 29), Date(2020, 5, 27)),
      w("UK", Phase::Before, Date(2020, 3, 10), Date(2020, 3, 25)),
      w("UK", Phase::During, Date(2020, 3, 26), Date(2020, 6, 1)),
      w("UK", Phase::After, Date(2020, 6, 2), Date(2020, 6, 17)),
      w("UK", Phase::Before, Date(2020, 10, 7), Date(2020, 10, 22)),
      w("UK", Phase::During, Date(2020, 10, 23), Date(2020, 11, 7)),
      w("UK", Phase::After, Date(2020, 11, 8), Date(2020, 11, 23)),
      w("UK", Phase::Before, Date(2020, 12, 20), Date(2021, 1, 5)),
      w("UK", Phase::During, Date(2021, 1, 6), Date(2021, 3, 16)),
      w("UK", Phase::After, Date(2021, 3, 17), Date(2021, 4, 1)),
  };
}

namespace detail {

template <class T>
const T& pick(Rng& rng, const std::vector<T>& v) {
  return v[rng.below(v.size())];
}

inline std::string pii_phrase(Rng& rng) {
  switch (rng.below(3)) {
    case 0: return std::string("our daughter ") + pick(rng, names()) + " has been accepted";
    case 1: return std::string("flying to ") + pick(rng, locations()) + " this evening";
    default: return std::string("my shift at ") + pick(rng, organisations()) + " got cancelled";
  }
}

}  // namespace detail

inline SynthCorpus generate(const SynthOptions& opts) {
  if (opts.users == 0 || opts.posts < opts.users) throw ConfigError("synth: need posts >= users >= 1");
  Rng rng(opts.seed);
  const auto& th = themes();
  const auto windows = table2_windows();
  const std::vector<std::string> countries = {"Australia", "India", "US", "UK"};

  // Every user posts once; the rest follows a Zipf law over user rank.
  std::vector<std::size_t> owner;
  for (std::size_t u = 0; u < opts.users; ++u) owner.push_back(u);
  std::vector<double> cum;
  double acc = 0.0;
  for (std::size_t u = 0; u < opts.users; ++u) {
    acc += 1.0 / std::pow(static_cast<double>(u + 1), opts.zipf_exponent);
    cum.push_back(acc);
  }
  for (std::size_t i = opts.users; i < opts.posts; ++i) {
    const double x = rng.uniform() * acc;
    owner.push_back(static_cast<std::size_t>(std::upper_bound(cum.begin(), cum.end(), x) - cum.begin()));
  }
  rng.shuffle(owner.begin(), owner.end());

  struct UserProfile {
    std::string id;
    std::string country;
    std::size_t theme;
    std::vector<std::string> history;
  };
  std::vector<UserProfile> users;
  for (std::size_t u = 0; u < opts.users; ++u) {
    char id[16];
    std::snprintf(id, sizeof id, "u%04zu", u + 1);
    users.push_back({id, countries[rng.below(countries.size())], rng.below(th.size()), {}});
  }

  SynthCorpus out;
  std::size_t n_hashtags = 0, n_urls = 0, n_invalid_urls = 0, n_pii = 0, n_repeats = 0;
  std::map<std::string, std::size_t> by_country, by_language, domain_shares;
  std::size_t missing_geo = 0;
  for (std::size_t i = 0; i < opts.posts; ++i) {
    auto& user = users[owner[i]];
    corpus::PostRecord r;
    char pid[16];
    std::snprintf(pid, sizeof pid, "p%06zu", i + 1);
    r.post_id = pid;
    r.user_id = user.id;

    // Country / language, occasionally off-filter.
    std::optional<std::string> country = user.country;
    std::optional<std::string> language = std::string("en");
    if (rng.uniform() < opts.off_filter_rate) {
      switch (rng.below(3)) {
        case 0: country = "Canada"; break;
        case 1: language = "es"; break;
        default: country.reset(); break;
      }
    }
    r.country = country;
    r.language = language;

    // Date inside one of the user's country windows, or anywhere in the span.
    Date day;
    std::vector<const corpus::PeriodWindow*> own;
    for (const auto& w : windows) {
      if (w.country == user.country) own.push_back(&w);
    }
    if (rng.uniform() < opts.outside_window_rate) {
      day = Date(2020, 2, 1) + static_cast<std::int64_t>(rng.below(480));
    } else {
      const auto* w = own[rng.below(own.size())];
      day = w->start + static_cast<std::int64_t>(rng.below(static_cast<std::size_t>(w->day_count())));
    }
    r.timestamp = Timestamp{day.days() * 86400 + static_cast<std::int64_t>(rng.below(86400))};

    const std::size_t theme = rng.uniform() < 0.7 ? user.theme : rng.below(th.size());
    std::string text;
    bool pii = false;
    if (!user.history.empty() && rng.uniform() < opts.repeat_rate) {
      text = user.history[rng.below(user.history.size())];
      ++n_repeats;
    } else {
      std::vector<std::string> words;
      const std::size_t n = 5 + rng.below(5);
      for (std::size_t k = 0; k < n; ++k) words.push_back(detail::pick(rng, th[theme].words));
      if (rng.uniform() < 0.35) words.push_back(detail::pick(rng, positive_words()));
      if (rng.uniform() < 0.35) words.push_back(detail::pick(rng, negative_words()));
      for (std::size_t k = 0; k < 2; ++k) {
        words.insert(words.begin() + static_cast<std::ptrdiff_t>(rng.below(words.size() + 1)),
                     detail::pick(rng, filler_words()));
      }
      text = join(words, " ");
      if (rng.uniform() < opts.pii_rate) {
        text = detail::pii_phrase(rng) + ", " + text;
        pii = true;
      }
      if (rng.uniform() < 0.1) text = "@user" + std::to_string(rng.below(500)) + " " + text;
      user.history.push_back(text);
    }
    if (pii || text.find("our daughter") != std::string::npos || text.find("flying to") != std::string::npos ||
        text.find("my shift at") != std::string::npos) {
      ++n_pii;
    }

    const std::size_t n_tags = rng.uniform() < 0.6 ? 1 + rng.below(3) : 0;
    std::set<std::string> tags;
    for (std::size_t k = 0; k < n_tags; ++k) tags.insert(detail::pick(rng, th[theme].hashtags));
    for (const auto& t : tags) {
      r.hashtags.push_back(t);
      text += " #" + t;
    }
    n_hashtags += r.hashtags.size();

    if (rng.uniform() < opts.url_rate) {
      const std::size_t n = 1 + rng.below(2);
      for (std::size_t k = 0; k < n; ++k) {
        const auto& d = detail::pick(rng, domains());
        r.urls.push_back(d.url);
        ++domain_shares[*d.domain ? d.domain : "203.0.113.7"];
      }
      if (rng.uniform() < 0.05) {
        r.urls.push_back("notaurl");
        ++n_invalid_urls;
      }
    }
    n_urls += r.urls.size();
    r.text = text;

    by_country[r.country.value_or("")] += 1;
    by_language[r.language.value_or("")] += 1;
    if (!r.country) ++missing_geo;
    out.records.push_back(std::move(r));
  }

  std::map<std::size_t, std::size_t> hist;
  {
    std::map<std::string, std::size_t> per_user;
    for (const auto& r : out.records) ++per_user[r.user_id];
    for (const auto& [u, n] : per_user) ++hist[n];
  }
  auto& m = out.manifest;
  m["generator"] = "privlens-synth";
  m["seed"] = opts.seed;
  m["posts"] = opts.posts;
  m["users"] = opts.users;
  m["zipf_exponent"] = opts.zipf_exponent;
  m["hashtags"] = n_hashtags;
  m["urls"] = n_urls;
  m["invalid_urls"] = n_invalid_urls;
  m["pii_posts"] = n_pii;
  m["repeated_posts"] = n_repeats;
  m["missing_country"] = missing_geo;
  nlohmann::ordered_json bc = nlohmann::ordered_json::object();
  for (const auto& [k, v] : by_country) {
    if (!k.empty()) bc[k] = v;
  }
  m["posts_per_country"] = bc;
  nlohmann::ordered_json bl = nlohmann::ordered_json::object();
  for (const auto& [k, v] : by_language) bl[k] = v;
  m["posts_per_language"] = bl;
  nlohmann::ordered_json h = nlohmann::ordered_json::object();
  for (const auto& [k, v] : hist) h[std::to_string(k)] = v;
  m["posts_per_user"] = h;
  nlohmann::ordered_json ds = nlohmann::ordered_json::object();
  for (const auto& [k, v] : domain_shares) ds[k] = v;
  m["domain_shares"] = ds;
  return out;
}

// Scanner reports for every generated domain: a handful of dated reports
// per domain, one of them outside the default collection window.
inline std::vector<urlsec::ScanReport> generate_reports(std::uint64_t seed) {
  Rng rng(seed);
  std::vector<urlsec::ScanReport> out;
  for (const auto& d : domains()) {
    if (!*d.domain) continue;
    const std::size_t n = 2 + rng.below(4);
    for (std::size_t k = 0; k < n; ++k) {
      urlsec::ScanReport r;
      r.domain = d.domain;
      r.date = Date(2020, 1, 1) + static_cast<std::int64_t>(rng.below(676));
      r.total = 70 + static_cast<std::int64_t>(rng.below(20));
      const std::int64_t jitter = d.positives > 0 ? static_cast<std::int64_t>(rng.below(5)) - 2 : 0;
      r.positives = std::clamp<std::int64_t>(d.positives + jitter, 0, r.total);
      out.push_back(r);
    }
    urlsec::ScanReport late{d.domain, Date(2022, 3, 1), d.positives > 0 ? 1 : 0, 90};
    out.push_back(late);
  }
  return out;
}

inline std::string to_cache(std::span<const urlsec::ScanReport> reports) {
  std::string s;
  for (const auto& r : reports) s += urlsec::to_cache_line(r) + "\n";
  return s;
}

}  // namespace privlens::synth
