#pragma once

// Pipeline stages and the full run: ingest -> filter -> classify ->
// hashtag clusters -> topics -> sentiment -> privacy -> urls -> vtscore.
// Stages exchange plain values; every stage failure surfaces as a
// StageError naming the stage.

#include <algorithm>
#include <filesystem>
#include <functional>
#include <map>
#include <numeric>
#include <set>
#include <string>
#include <vector>

#include "json.hpp"
#include "privlens/app/config.hpp"
#include "privlens/app/hash.hpp"
#include "privlens/app/report.hpp"
#include "privlens/corpus.hpp"
#include "privlens/privacy.hpp"
#include "privlens/sentiment.hpp"
#include "privlens/textmodel.hpp"
#include "privlens/urlsec.hpp"
#include "privlens/util.hpp"

namespace privlens::app {

inline constexpr const char* kVersion = "0.1.0";

class StageError : public Error {
 public:
  StageError(std::string stage, const std::string& cause)
      : Error("stage '" + stage + "' failed: " + cause), stage_(std::move(stage)) {}

  const std::string& stage() const { return stage_; }

 private:
  std::string stage_;
};

struct RunOptions {
  std::size_t threads = 1;
  bool offline = false;  // forbids network use even if the config allows it
  urlsec::ReportClient* report_client = nullptr;
  urlsec::CategoryClient* category_client = nullptr;
  std::function<void(const std::string&)> log;
};

class Context {
 public:
  Context(const PipelineConfig& cfg, RunOptions opts) : cfg(cfg), opts(std::move(opts)) {}

  const PipelineConfig& cfg;
  RunOptions opts;
  std::map<std::string, std::string> inputs;  // path -> sha256
  std::vector<std::string> warnings;

  // Records the digest of an input file and hands back its path.
  std::string input(const fs::path& p) {
    const auto s = p.string();
    if (!inputs.count(s)) inputs[s] = sha256_file(s);
    return s;
  }

  void warn(std::string msg) {
    log("warning: " + msg);
    warnings.push_back(std::move(msg));
  }

  void log(const std::string& msg) const {
    if (opts.log) opts.log(msg);
  }

  bool network_allowed() const { return !opts.offline && !cfg.offline; }

  const textmodel::Preprocessor& preprocessor() {
    if (!pre_) {
      auto stop = cfg.stopwords ? textmodel::StopwordSet::load(input(*cfg.stopwords))
                                : textmodel::StopwordSet::english_default();
      auto lem = cfg.lemmas ? textmodel::Lemmatizer::load(input(*cfg.lemmas)) : textmodel::Lemmatizer{};
      pre_.emplace(std::move(stop), std::move(lem));
    }
    return *pre_;
  }

  const privacy::Gazetteers& gazetteers() {
    if (!gaz_) {
      gaz_.emplace();
      gaz_->load(privacy::PiiKind::Name, input(cfg.names_gazetteer));
      gaz_->load(privacy::PiiKind::Location, input(cfg.locations_gazetteer));
      gaz_->load(privacy::PiiKind::Organisation, input(cfg.organisations_gazetteer));
    }
    return *gaz_;
  }

 private:
  std::optional<textmodel::Preprocessor> pre_;
  std::optional<privacy::Gazetteers> gaz_;
};

template <class F>
auto run_stage(Context& ctx, const std::string& name, F&& f) {
  ctx.log("stage " + name);
  try {
    return f();
  } catch (const ConfigError&) {
    throw;
  } catch (const StageError&) {
    throw;
  } catch (const std::exception& e) {
    throw StageError(name, e.what());
  }
}

using corpus::Phase;
using corpus::PostRecord;

inline bool is_lockdown_phase(Phase p) { return p != Phase::Unclassified; }

inline std::string join_tokens(const std::vector<std::string>& toks) {
  std::string s;
  for (const auto& t : toks) {
    if (!s.empty()) s.push_back(' ');
    s += t;
  }
  return s;
}

// ---------------------------------------------------------------------------
// ingest / filter
// ---------------------------------------------------------------------------

struct IngestResult {
  std::vector<PostRecord> records;  // after filtering
  corpus::LoadSummary summary;
  std::size_t dropped_missing = 0;
  std::size_t dropped_mismatch = 0;
};

inline IngestResult stage_ingest(Context& ctx) {
  return run_stage(ctx, "ingest", [&] {
    corpus::LoadOptions lo;
    if (ctx.cfg.schema_map) {
      lo.schema = corpus::SchemaMap::from_json(nlohmann::json::parse(read_file(ctx.input(*ctx.cfg.schema_map))));
    }
    lo.span_start = ctx.cfg.span_start;
    lo.span_end = ctx.cfg.span_end;
    auto loaded = corpus::load_corpus(ctx.input(ctx.cfg.corpus), lo);
    if (loaded.summary.skipped > 0) {
      ctx.warn("ingest skipped " + std::to_string(loaded.summary.skipped) + " of " +
               std::to_string(loaded.summary.lines) + " lines");
    }
    const std::set<std::string> countries(ctx.cfg.countries.begin(), ctx.cfg.countries.end());
    auto filtered = corpus::filter_corpus(loaded.records, countries, ctx.cfg.language);
    IngestResult r;
    r.records = std::move(filtered.records);
    r.summary = loaded.summary;
    r.dropped_missing = filtered.dropped_missing;
    r.dropped_mismatch = filtered.dropped_mismatch;
    if (r.records.empty()) throw Error("no posts left after filtering");
    return r;
  });
}

// ---------------------------------------------------------------------------
// periods
// ---------------------------------------------------------------------------

struct PeriodResult {
  std::vector<Phase> phases;  // per record
  Table infection_rates;
};

inline Table infection_rate_table() {
  return make_table("infection_rates");
}

inline PeriodResult stage_periods(Context& ctx, std::span<const PostRecord> records) {
  return run_stage(ctx, "periods", [&] {
    const auto windows = corpus::load_windows(ctx.input(ctx.cfg.windows));
    PeriodResult r;
    r.phases.reserve(records.size());
    std::size_t unclassified = 0;
    for (const auto& rec : records) {
      r.phases.push_back(corpus::classify_record(rec, windows));
      if (r.phases.back() == Phase::Unclassified) ++unclassified;
    }
    if (unclassified) ctx.warn(std::to_string(unclassified) + " posts fall outside every lockdown window");

    r.infection_rates = infection_rate_table();
    if (ctx.cfg.case_series) {
      const auto series = corpus::load_case_series(ctx.input(*ctx.cfg.case_series));
      for (const auto& country : ctx.cfg.countries) {
        auto it = series.find(country);
        for (const auto& w : windows.for_country(country)) {
          if (it == series.end()) {
            ctx.warn("no case series for " + country);
            break;
          }
          try {
            const auto ir = corpus::infection_rate(it->second, w);
            r.infection_rates.add({country, corpus::phase_name(w.phase), w.start.iso(), w.end.iso(),
                                   std::to_string(w.day_count()), fmt_fixed(ir.ir)});
          } catch (const Error& e) {
            ctx.warn(e.what());
          }
        }
      }
    }
    return r;
  });
}

// ---------------------------------------------------------------------------
// corpus statistics
// ---------------------------------------------------------------------------

inline std::vector<Table> corpus_tables(const IngestResult& in, std::span<const Phase> phases) {
  const auto stats = corpus::corpus_stats(in.records, phases);
  auto summary = make_table("corpus_summary");
  std::set<std::string> users;
  std::size_t urls = 0, hashtags = 0;
  for (const auto& r : in.records) {
    users.insert(r.user_id);
    urls += r.urls.size();
    hashtags += r.hashtags.size();
  }
  const auto unclassified = static_cast<std::size_t>(std::count(phases.begin(), phases.end(), Phase::Unclassified));
  for (const auto& [k, v] : std::vector<std::pair<std::string, std::size_t>>{
           {"lines", in.summary.lines},
           {"loaded", in.summary.loaded},
           {"skipped", in.summary.skipped},
           {"dropped_missing_geo_or_language", in.dropped_missing},
           {"dropped_other_country_or_language", in.dropped_mismatch},
           {"posts", in.records.size()},
           {"users", users.size()},
           {"hashtags", hashtags},
           {"urls", urls},
           {"unclassified_posts", unclassified}}) {
    summary.add({k, std::to_string(v)});
  }

  auto per_phase = make_table("posts_per_phase");
  std::map<std::string, std::size_t> per_country;
  for (const auto& [key, n] : stats.posts_per_phase) per_country[key.first] += n;
  for (const auto& [key, n] : stats.posts_per_phase) {
    per_phase.add({key.first, corpus::phase_name(key.second), std::to_string(n),
                   fmt_fixed(static_cast<double>(n) / static_cast<double>(per_country[key.first]))});
  }

  auto per_user = make_table("posts_per_user");
  for (const auto& [k, n] : stats.posts_per_user) per_user.add({std::to_string(k), std::to_string(n)});
  auto per_post = make_table("hashtags_per_post");
  for (const auto& [k, n] : stats.hashtags_per_post) per_post.add({std::to_string(k), std::to_string(n)});
  return {summary, per_phase, per_user, per_post};
}

// ---------------------------------------------------------------------------
// hashtag clusters
// ---------------------------------------------------------------------------

struct HashtagResult {
  Table clusters;  // hashtag observations per (country, phase, cluster label)
  Table terms;     // top terms per raw cluster
};

inline textmodel::LabelMap load_label_map(Context& ctx, const std::optional<fs::path>& path, std::size_t n) {
  if (!path) return textmodel::LabelMap::identity(n);
  return textmodel::LabelMap::load(ctx.input(*path));
}

inline HashtagResult stage_hashtags(Context& ctx, std::span<const PostRecord> records, std::span<const Phase> phases) {
  return run_stage(ctx, "hashtags", [&] {
    HashtagResult r;
    r.clusters = make_table("hashtag_clusters");
    r.terms = make_table("hashtag_cluster_terms");
    const auto& pre = ctx.preprocessor();
    std::vector<std::vector<std::string>> docs;
    std::vector<std::size_t> source;  // exploded copy -> record
    for (std::size_t i = 0; i < records.size(); ++i) {
      if (records[i].hashtags.empty()) continue;
      const auto tokens = pre(textmodel::strip_hashtags(records[i].text));
      for (std::size_t c = 0; c < textmodel::explode_by_hashtags(records[i]).size(); ++c) {
        docs.push_back(tokens);
        source.push_back(i);
      }
    }
    if (docs.empty()) {
      ctx.warn("no hashtagged posts; hashtag tables are empty");
      return r;
    }
    const auto vocab = textmodel::tfidf_fit(docs);
    const auto matrix = textmodel::tfidf_matrix(vocab, docs);
    textmodel::KMeansOptions ko;
    ko.k = ctx.cfg.hashtag_k;
    ko.seed = ctx.cfg.hashtag_seed;
    ko.max_iter = ctx.cfg.kmeans_max_iter;
    if (ko.k > docs.size()) {
      ctx.warn("hashtag k reduced from " + std::to_string(ko.k) + " to " + std::to_string(docs.size()) +
               " (fewer hashtag observations than clusters)");
      ko.k = docs.size();
    }
    const auto model = textmodel::kmeans_fit(matrix, ko);
    const auto labelled = textmodel::apply_label_map(model.assignments, load_label_map(ctx, ctx.cfg.hashtag_labels, ko.k),
                                                     ko.k);
    std::map<std::tuple<std::string, Phase, std::string>, std::size_t> counts;
    for (std::size_t d = 0; d < docs.size(); ++d) {
      const auto i = source[d];
      if (!is_lockdown_phase(phases[i])) continue;
      ++counts[{records[i].country.value_or(""), phases[i], labelled.labels[d]}];
    }
    for (const auto& [key, n] : counts) {
      r.clusters.add({std::get<0>(key), corpus::phase_name(std::get<1>(key)), std::get<2>(key), std::to_string(n)});
    }
    std::vector<std::size_t> sizes(ko.k, 0);
    for (auto a : model.assignments) ++sizes[a];
    for (std::size_t c = 0; c < ko.k; ++c) {
      std::vector<std::string> words;
      for (const auto& [t, w] : textmodel::top_terms(model, vocab, c, 10)) words.push_back(t);
      std::size_t first = 0;
      while (first < model.assignments.size() && model.assignments[first] != c) ++first;
      const std::string label = first < model.assignments.size() ? labelled.labels[first] : "";
      r.terms.add({std::to_string(c), label, std::to_string(sizes[c]), join_tokens(words)});
    }
    return r;
  });
}

// ---------------------------------------------------------------------------
// topics
// ---------------------------------------------------------------------------

struct TopicResult {
  std::vector<std::size_t> topic_ids;  // raw LDA topic per record
  std::vector<std::string> labels;     // label per record
  std::vector<std::string> label_set;  // sorted distinct labels
  Table topics;
};

inline TopicResult stage_topics(Context& ctx, std::span<const PostRecord> records) {
  return run_stage(ctx, "topics", [&] {
    const auto& pre = ctx.preprocessor();
    std::vector<std::vector<std::string>> docs;
    docs.reserve(records.size());
    for (const auto& r : records) docs.push_back(pre(r.text));
    const auto vocab = textmodel::tfidf_fit(docs);
    const auto ids = textmodel::to_token_ids(vocab, docs);
    textmodel::LdaOptions lo;
    lo.num_topics = ctx.cfg.topic_k;
    lo.alpha = ctx.cfg.lda_alpha;
    lo.beta = ctx.cfg.lda_beta;
    lo.iterations = ctx.cfg.lda_iterations;
    lo.seed = ctx.cfg.topic_seed;
    const auto model = textmodel::lda_fit(ids, vocab.size(), lo);
    for (const auto& w : model.warnings()) ctx.warn(w);

    TopicResult r;
    r.topic_ids.reserve(records.size());
    for (std::size_t d = 0; d < records.size(); ++d) {
      std::size_t best = 0;
      for (std::size_t k = 1; k < lo.num_topics; ++k) {
        if (model.doc_topic(d, k) > model.doc_topic(d, best)) best = k;
      }
      r.topic_ids.push_back(best);
    }
    const auto map = load_label_map(ctx, ctx.cfg.topic_labels, lo.num_topics);
    auto labelled = textmodel::apply_label_map(r.topic_ids, map, lo.num_topics);
    r.labels = std::move(labelled.labels);
    const auto distinct = map.distinct_labels(lo.num_topics);
    r.label_set.assign(distinct.begin(), distinct.end());

    r.topics = make_table("topics");
    std::vector<std::size_t> sizes(lo.num_topics, 0);
    for (auto t : r.topic_ids) ++sizes[t];
    for (std::size_t k = 0; k < lo.num_topics; ++k) {
      std::vector<std::string> words;
      for (auto w : model.top_words(k, 15)) words.push_back(vocab.term(w));
      r.topics.add({std::to_string(k), *map.label_of(k), std::to_string(sizes[k]), join_tokens(words)});
    }
    return r;
  });
}

// ---------------------------------------------------------------------------
// sentiment
// ---------------------------------------------------------------------------

inline Table sentiment_table() {
  return make_table("sentiment");
}

inline Table stage_sentiment(Context& ctx, std::span<const PostRecord> records, std::span<const Phase> phases,
                             std::span<const std::string> topic_labels) {
  return run_stage(ctx, "sentiment", [&] {
    const auto lex = sentiment::Lexicon::load(ctx.input(ctx.cfg.lexicon));
    sentiment::Aggregator agg;
    for (std::size_t i = 0; i < records.size(); ++i) {
      if (!is_lockdown_phase(phases[i])) continue;
      const auto s = sentiment::score(records[i].text, lex);
      agg.add(topic_labels[i], corpus::phase_name(phases[i]), sentiment::label(s, ctx.cfg.sentiment_threshold));
    }
    auto t = sentiment_table();
    t.data.rows = agg.to_csv().rows;
    return t;
  });
}

// ---------------------------------------------------------------------------
// privacy
// ---------------------------------------------------------------------------

// Trained privacy models plus what is needed to vectorise new posts.
struct PrivacyModel {
  textmodel::Vocabulary vocab;
  privacy::HmmBundle hmm;
  std::vector<std::string> cluster_labels;

  textmodel::SparseVector vectorize(const std::string& processed_text) const {
    const auto toks = split_whitespace(processed_text);
    return textmodel::tfidf_transform(vocab, toks);
  }

  nlohmann::ordered_json to_json() const {
    nlohmann::ordered_json j;
    j["format"] = "privlens.privacy";
    j["version"] = 1;
    j["vocabulary"] = vocab.to_json();
    j["cluster_labels"] = cluster_labels;
    auto clusters = nlohmann::ordered_json::array();
    for (const auto& c : hmm.clusters) clusters.push_back(c.to_json());
    j["clusters"] = std::move(clusters);
    j["merged"] = hmm.merged.to_json();
    j["pii"] = hmm.pii.to_json();
    return j;
  }

  static PrivacyModel from_json(const nlohmann::json& j) {
    if (j.value("format", "") != "privlens.privacy" || j.value("version", 0) != 1) {
      throw Error("not a privlens privacy model (format/version mismatch)");
    }
    PrivacyModel m;
    m.vocab = textmodel::Vocabulary::from_json(j.at("vocabulary"));
    m.cluster_labels = j.at("cluster_labels").get<std::vector<std::string>>();
    auto vec = [&](const std::string& t) { return m.vectorize(t); };
    for (const auto& c : j.at("clusters")) m.hmm.clusters.push_back(privacy::PrivacyHmm::from_json(c, vec));
    m.hmm.merged = privacy::PrivacyHmm::from_json(j.at("merged"), vec);
    m.hmm.pii = privacy::PrivacyHmm::from_json(j.at("pii"), vec);
    return m;
  }
};

inline privacy::Split privacy_split(const Context& ctx, std::span<const PostRecord> records) {
  return privacy::split_train_test(records, ctx.cfg.split_ratio, ctx.cfg.split_seed);
}

inline std::size_t label_index(std::span<const std::string> label_set, const std::string& label) {
  const auto it = std::lower_bound(label_set.begin(), label_set.end(), label);
  if (it == label_set.end() || *it != label) throw Error("unknown topic label '" + label + "'");
  return static_cast<std::size_t>(it - label_set.begin());
}

inline PrivacyModel stage_privacy_train(Context& ctx, std::span<const PostRecord> records,
                                        std::span<const std::string> topic_labels,
                                        std::span<const std::string> label_set, const privacy::Split& split) {
  return run_stage(ctx, "privacy-train", [&] {
    const auto& pre = ctx.preprocessor();
    const auto& gaz = ctx.gazetteers();
    std::vector<std::vector<std::string>> docs;
    for (auto i : split.train) docs.push_back(pre(records[i].text));
    PrivacyModel m;
    m.vocab = textmodel::tfidf_fit(docs);
    m.cluster_labels.assign(label_set.begin(), label_set.end());
    std::vector<privacy::TrainPost> posts;
    posts.reserve(split.train.size());
    for (std::size_t n = 0; n < split.train.size(); ++n) {
      const auto& r = records[split.train[n]];
      privacy::TrainPost p;
      p.user_id = r.user_id;
      p.timestamp = r.timestamp;
      p.cluster = label_index(label_set, topic_labels[split.train[n]]);
      p.text = join_tokens(docs[n]);
      p.vector = textmodel::tfidf_transform(m.vocab, docs[n]);
      p.has_pii = !privacy::detect_pii(r.text, gaz).empty();
      posts.push_back(std::move(p));
    }
    m.hmm = privacy::build_hmm(posts, label_set.size(), ctx.cfg.tau_sim, ctx.opts.threads);
    return m;
  });
}

// Chronological test sequences matched against the merged model.
inline std::vector<privacy::TestUser> test_users(Context& ctx, const PrivacyModel& model,
                                                 std::span<const PostRecord> records, std::span<const Phase> phases,
                                                 std::span<const std::string> topic_labels,
                                                 const privacy::Split& split) {
  const auto& pre = ctx.preprocessor();
  std::map<std::string, std::vector<std::size_t>> by_user;
  for (auto i : split.test) by_user[records[i].user_id].push_back(i);
  std::vector<privacy::TestUser> users;
  for (auto& [u, idx] : by_user) {
    std::stable_sort(idx.begin(), idx.end(),
                     [&](std::size_t a, std::size_t b) { return records[a].timestamp < records[b].timestamp; });
    privacy::TestUser tu{u, {}};
    for (auto i : idx) {
      const auto text = join_tokens(pre(records[i].text));
      tu.posts.push_back({topic_labels[i], is_lockdown_phase(phases[i]) ? corpus::phase_name(phases[i]) : "",
                          model.hmm.merged.match_node(model.vectorize(text), text)});
    }
    users.push_back(std::move(tu));
  }
  return users;
}

struct PrivacyResult {
  Table cdf;
  Table risk_vs_n;
  Table topics;
  std::vector<std::string> traces;
};

inline PrivacyResult stage_privacy_score(Context& ctx, const PrivacyModel& model, std::span<const PostRecord> records,
                                         std::span<const Phase> phases, std::span<const std::string> topic_labels,
                                         const privacy::Split& split) {
  return run_stage(ctx, "privacy-score", [&] {
    const auto users = test_users(ctx, model, records, phases, topic_labels, split);
    privacy::CohortOptions co;
    co.max_posts = ctx.cfg.max_posts;
    co.prior.max_path_length = ctx.cfg.max_path_length;
    co.prior.max_paths = ctx.cfg.max_paths;
    const auto rep = privacy::cohort_report(model.hmm.merged, model.hmm.pii, users, co);

    PrivacyResult r;
    r.cdf = make_table("risk_cdf");
    for (const auto& row : rep.cdf) r.cdf.add({row.topic, row.phase, fmt_fixed(row.risk), fmt_fixed(row.cdf)});
    r.risk_vs_n = make_table("risk_vs_n");
    for (const auto& row : rep.risk_vs_n) {
      r.risk_vs_n.add({std::to_string(row.n), std::to_string(row.users), fmt_fixed(row.mean_risk)});
    }
    r.topics = make_table("risk_topics");
    for (const auto& b : rep.breakdown) {
      r.topics.add({b.topic, std::to_string(b.users), fmt_fixed(b.mean_risk), std::to_string(b.identifiable),
                    std::to_string(b.unique), std::to_string(b.uniform)});
    }
    std::size_t truncated = 0;
    for (const auto& t : rep.traces) {
      r.traces.push_back(t.to_json().dump());
      if (t.prior.truncated) ++truncated;
    }
    if (truncated) ctx.warn(std::to_string(truncated) + " linkability priors hit the path caps");
    return r;
  });
}

// ---------------------------------------------------------------------------
// urls
// ---------------------------------------------------------------------------

struct UrlResult {
  std::vector<urlsec::DomainDossier> dossiers;  // sorted by domain
  Table categories;                             // shares per (country, phase, category)
  std::size_t dropped = 0;
};

inline UrlResult stage_urls(Context& ctx, std::span<const PostRecord> records, std::span<const Phase> phases) {
  return run_stage(ctx, "urls", [&] {
    const auto psl = urlsec::PublicSuffixList::load(ctx.input(ctx.cfg.public_suffix_list));
    const auto cats = urlsec::CategoryMap::load(ctx.input(ctx.cfg.category_map));
    urlsec::CategoryClient* remote = ctx.network_allowed() ? ctx.opts.category_client : nullptr;
    std::map<std::string, urlsec::DomainDossier> by_domain;
    UrlResult r;
    std::size_t unregistrable = 0;
    for (std::size_t i = 0; i < records.size(); ++i) {
      if (!is_lockdown_phase(phases[i])) continue;
      const auto ex = urlsec::extract_urls(records[i]);
      r.dropped += ex.dropped;
      for (const auto& url : ex.urls) {
        urlsec::DomainResult dr;
        try {
          dr = urlsec::registered_domain(url, psl);
        } catch (const Error&) {
          ++unregistrable;
          continue;
        }
        const auto key = dr.domain ? dr.domain->registered : dr.host;
        auto [it, fresh] = by_domain.try_emplace(key);
        if (fresh) {
          it->second.domain = key;
          if (dr.ip_literal) {
            it->second.category = urlsec::kIpLiteral;
          } else {
            auto c = urlsec::categorize(key, cats, remote);
            if (c.warning) ctx.warn(*c.warning);
            it->second.category = c.category;
          }
        }
        ++it->second.shares[{records[i].country.value_or(""), phases[i]}];
      }
    }
    if (r.dropped) ctx.warn(std::to_string(r.dropped) + " syntactically invalid URLs dropped");
    if (unregistrable) ctx.warn(std::to_string(unregistrable) + " URLs without a registrable domain skipped");
    r.categories = make_table("domain_categories");
    std::map<std::tuple<std::string, Phase, std::string>, std::size_t> counts;
    for (auto& [d, dossier] : by_domain) {
      for (const auto& [key, n] : dossier.shares) counts[{key.first, key.second, dossier.category}] += n;
      r.dossiers.push_back(std::move(dossier));
    }
    for (const auto& [key, n] : counts) {
      r.categories.add(
          {std::get<0>(key), corpus::phase_name(std::get<1>(key)), std::get<2>(key), std::to_string(n)});
    }
    return r;
  });
}

// ---------------------------------------------------------------------------
// vtscore
// ---------------------------------------------------------------------------

struct SecurityResult {
  Table scores;
  Table tiers;
  Table suspicious_categories;
};

inline SecurityResult stage_vtscore(Context& ctx, std::vector<urlsec::DomainDossier>& dossiers) {
  return run_stage(ctx, "vtscore", [&] {
    urlsec::ReportCache cache;
    std::string cache_path;
    if (ctx.cfg.report_cache) {
      cache_path = ctx.cfg.report_cache->string();
      if (fs::is_regular_file(cache_path)) {
        cache = urlsec::load_report_cache(ctx.input(cache_path));
      } else {
        ctx.warn("report cache '" + cache_path + "' not found; no scanner reports available");
      }
      if (cache.malformed) ctx.warn(std::to_string(cache.malformed) + " malformed report cache lines skipped");
    }
    urlsec::ReportClient* client = nullptr;
    if (ctx.cfg.live_scanner && ctx.network_allowed()) {
      if (!ctx.opts.report_client) throw ConfigError("live scanner mode requested but no scanner client is available");
      client = ctx.opts.report_client;
    }
    const urlsec::DateWindow window{ctx.cfg.report_window_start, ctx.cfg.report_window_end};
    const auto mode =
        ctx.cfg.positive_reports_only ? urlsec::Denominator::PositiveReports : urlsec::Denominator::AllReports;

    SecurityResult r;
    r.scores = make_table("vtscores");
    for (auto& d : dossiers) {
      if (d.category == urlsec::kIpLiteral) continue;
      auto fetched = urlsec::fetch_reports(cache, cache_path, d.domain, window, client);
      for (auto& w : fetched.warnings) ctx.warn(std::move(w));
      const auto s = urlsec::vtscore(fetched.reports, mode, window);
      if (!s) continue;
      d.score = s->score;
      r.scores.add({d.domain, d.category, fmt_fixed(s->score), std::to_string(s->report_count),
                    std::to_string(urlsec::tier_of(d.score, ctx.cfg.thresholds))});
    }
    r.tiers = make_table("tier_table");
    const auto tiers = urlsec::tier_table(dossiers, ctx.cfg.thresholds);
    r.tiers.data.rows = urlsec::tier_table_csv(tiers).rows;
    r.suspicious_categories = make_table("suspicious_categories");
    for (const auto& [key, cats] : urlsec::category_distribution(dossiers, ctx.cfg.suspicious_min_score)) {
      for (const auto& [c, f] : cats) {
        r.suspicious_categories.add({key.first, corpus::phase_name(key.second), c, fmt_fixed(f)});
      }
    }
    return r;
  });
}

// ---------------------------------------------------------------------------
// run metadata and the full pipeline
// ---------------------------------------------------------------------------

inline nlohmann::ordered_json run_metadata(const Context& ctx) {
  const auto& c = ctx.cfg;
  nlohmann::ordered_json j;
  j["tool"] = "privlens";
  j["version"] = kVersion;
  if (!c.config_path.empty()) {
    j["config"] = c.config_path.string();
    j["config_sha256"] = sha256_file(c.config_path.string());
  }
  j["seeds"] = {{"hashtags", c.hashtag_seed}, {"topics", c.topic_seed}, {"split", c.split_seed}};
  nlohmann::ordered_json p;
  p["countries"] = c.countries;
  p["language"] = c.language;
  p["hashtag_k"] = c.hashtag_k;
  p["kmeans_max_iter"] = c.kmeans_max_iter;
  p["topic_k"] = c.topic_k;
  p["lda_alpha"] = c.lda_alpha ? nlohmann::ordered_json(*c.lda_alpha) : nlohmann::ordered_json(nullptr);
  p["lda_beta"] = c.lda_beta;
  p["lda_iterations"] = c.lda_iterations;
  p["sentiment_threshold"] = c.sentiment_threshold;
  p["tau_sim"] = c.tau_sim;
  p["split_ratio"] = c.split_ratio;
  p["max_path_length"] = c.max_path_length;
  p["max_paths"] = c.max_paths;
  p["max_posts"] = c.max_posts;
  p["thresholds"] = c.thresholds;
  p["vtscore_denominator"] = c.positive_reports_only ? "positive" : "all";
  p["report_window"] = {c.report_window_start.iso(), c.report_window_end.iso()};
  p["scanner"] = c.live_scanner && ctx.network_allowed() ? "live" : "offline";
  j["parameters"] = std::move(p);
  auto inputs = nlohmann::ordered_json::array();
  for (const auto& [path, sha] : ctx.inputs) inputs.push_back({{"path", path}, {"sha256", sha}});
  j["inputs"] = std::move(inputs);
  return j;
}

// Everything the stages produce, kept for callers that persist
// intermediate artefacts.
struct RunState {
  IngestResult ingest;
  PeriodResult periods;
  TopicResult topics;
  privacy::Split split;
  std::optional<PrivacyModel> privacy_model;
  std::vector<urlsec::DomainDossier> dossiers;
};

inline ReportBundle run_pipeline(const PipelineConfig& cfg, RunOptions opts = {}, RunState* state = nullptr) {
  Context ctx(cfg, std::move(opts));
  RunState local;
  RunState& s = state ? *state : local;
  ReportBundle b;

  s.ingest = stage_ingest(ctx);
  const auto& records = s.ingest.records;
  s.periods = stage_periods(ctx, records);
  for (auto& t : corpus_tables(s.ingest, s.periods.phases)) b.tables.push_back(std::move(t));
  b.tables.push_back(s.periods.infection_rates);

  auto hashtags = stage_hashtags(ctx, records, s.periods.phases);
  b.tables.push_back(std::move(hashtags.clusters));
  b.tables.push_back(std::move(hashtags.terms));

  s.topics = stage_topics(ctx, records);
  b.tables.push_back(s.topics.topics);
  b.tables.push_back(stage_sentiment(ctx, records, s.periods.phases, s.topics.labels));

  s.split = privacy_split(ctx, records);
  s.privacy_model = stage_privacy_train(ctx, records, s.topics.labels, s.topics.label_set, s.split);
  auto risk = stage_privacy_score(ctx, *s.privacy_model, records, s.periods.phases, s.topics.labels, s.split);
  b.tables.push_back(std::move(risk.cdf));
  b.tables.push_back(std::move(risk.risk_vs_n));
  b.tables.push_back(std::move(risk.topics));
  b.traces = std::move(risk.traces);

  auto urls = stage_urls(ctx, records, s.periods.phases);
  b.tables.push_back(std::move(urls.categories));
  s.dossiers = std::move(urls.dossiers);
  auto sec = stage_vtscore(ctx, s.dossiers);
  b.tables.push_back(std::move(sec.scores));
  b.tables.push_back(std::move(sec.tiers));
  b.tables.push_back(std::move(sec.suspicious_categories));

  b.metadata = run_metadata(ctx);
  b.warnings = ctx.warnings;
  if (auto errs = b.validate(); !errs.empty()) throw StageError("report", errs.front());
  return b;
}

}  // namespace privlens::app
