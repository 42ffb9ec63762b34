// privlens: command-line front end for the analysis pipeline.
//
// Every subcommand reads the JSON configuration; stages after `ingest` pick
// up the intermediate artefacts earlier stages left in the output directory,
// and `run` does everything in one go.
//
// Exit codes: 0 success, 2 configuration error, 3 stage failure.

#include <CLI11.hpp>

#include <cstdlib>
#include <iostream>
#include <memory>
#include <optional>
#include <string>

#include "privlens/app/artifacts.hpp"
#include "privlens/app/pipeline.hpp"
#include "privlens/urlsec/vt_client.hpp"

namespace {

using namespace privlens;
using namespace privlens::app;

constexpr int kExitConfig = 2;
constexpr int kExitStage = 3;

struct Globals {
  std::string config = "privlens.json";
  std::string out;
  std::string format;
  std::size_t threads = 1;
  bool offline = false;
  bool quiet = false;
};

struct Session {
  PipelineConfig cfg;
  fs::path out;
  std::string format;
  RunOptions opts;
  std::unique_ptr<urlsec::VtClient> client;
};

Session open_session(const Globals& g) {
  Session s;
  s.cfg = validate_config(g.config);
  s.out = g.out.empty() ? s.cfg.output_dir : fs::path(g.out);
  s.format = g.format.empty() ? s.cfg.format : g.format;
  if (s.format != "csv" && s.format != "json") throw ConfigError("--format must be csv or json");
  s.opts.threads = std::max<std::size_t>(1, g.threads);
  s.opts.offline = g.offline;
  if (!g.quiet) s.opts.log = [](const std::string& m) { std::cerr << "privlens: " << m << "\n"; };
  if (s.cfg.live_scanner && !g.offline && !s.cfg.offline) {
    urlsec::VtClientOptions vo;
    vo.requests_per_minute = s.cfg.requests_per_minute;
    s.client = std::make_unique<urlsec::VtClient>(urlsec::api_key_from_env(), urlsec::https_get(vo.host), vo);
    s.opts.report_client = s.client.get();
    s.opts.category_client = s.client.get();
  }
  std::error_code ec;
  fs::create_directories(s.out, ec);
  if (ec) throw Error("cannot create output directory '" + s.out.string() + "'");
  return s;
}

void write_tables(const Session& s, std::span<const Table> tables) {
  for (const auto& t : tables) {
    if (auto errs = validate_table(t); !errs.empty()) throw StageError("report", errs.front());
    const auto path = s.out / (t.name + (s.format == "csv" ? ".csv" : ".json"));
    write_file(path.string(), s.format == "csv" ? t.data.to_string() : table_to_json(t).dump(2) + "\n");
  }
}

void write_traces(const Session& s, const std::vector<std::string>& traces) {
  std::string text;
  for (const auto& t : traces) text += t + "\n";
  write_file((s.out / "risk_traces.jsonl").string(), text);
}

int cmd_ingest(const Globals& g) {
  auto s = open_session(g);
  Context ctx(s.cfg, s.opts);
  const auto in = stage_ingest(ctx);
  artifacts::write_posts(s.out, in.records);
  const std::vector<Phase> unknown(in.records.size(), Phase::Unclassified);
  write_tables(s, std::vector<Table>{corpus_tables(in, unknown).front()});
  std::cout << in.records.size() << " posts kept (" << in.summary.loaded << " loaded, " << in.summary.skipped
            << " skipped)\n";
  return 0;
}

int cmd_periods(const Globals& g) {
  auto s = open_session(g);
  Context ctx(s.cfg, s.opts);
  IngestResult in;
  in.records = artifacts::read_posts(s.out);
  auto periods = stage_periods(ctx, in.records);
  artifacts::write_periods(s.out, in.records, periods.phases);
  auto tables = corpus_tables(in, periods.phases);
  // Ingest counters are only known to `ingest`; refresh its summary in place.
  std::optional<Table> summary;
  for (auto& t : artifacts::read_tables(s.out)) {
    if (t.name == "corpus_summary") summary = std::move(t);
  }
  if (summary) {
    for (auto& row : summary->data.rows) {
      if (row[0] == "unclassified_posts") {
        for (const auto& fresh : tables.front().data.rows) {
          if (fresh[0] == row[0]) row[1] = fresh[1];
        }
      }
    }
    tables.front() = std::move(*summary);
  } else {
    tables.erase(tables.begin());
  }
  tables.push_back(periods.infection_rates);
  write_tables(s, tables);
  return 0;
}

int cmd_hashtags(const Globals& g) {
  auto s = open_session(g);
  Context ctx(s.cfg, s.opts);
  const auto records = artifacts::read_posts(s.out);
  const auto phases = artifacts::read_periods(s.out, records);
  auto r = stage_hashtags(ctx, records, phases);
  write_tables(s, std::vector<Table>{r.clusters, r.terms});
  return 0;
}

int cmd_topics(const Globals& g) {
  auto s = open_session(g);
  Context ctx(s.cfg, s.opts);
  const auto records = artifacts::read_posts(s.out);
  const auto topics = stage_topics(ctx, records);
  artifacts::write_topics(s.out, records, topics);
  write_tables(s, std::vector<Table>{topics.topics});
  return 0;
}

int cmd_sentiment(const Globals& g) {
  auto s = open_session(g);
  Context ctx(s.cfg, s.opts);
  const auto records = artifacts::read_posts(s.out);
  const auto phases = artifacts::read_periods(s.out, records);
  const auto topics = artifacts::read_topics(s.out, records);
  write_tables(s, std::vector<Table>{stage_sentiment(ctx, records, phases, topics.labels)});
  return 0;
}

int cmd_privacy_train(const Globals& g) {
  auto s = open_session(g);
  Context ctx(s.cfg, s.opts);
  const auto records = artifacts::read_posts(s.out);
  const auto topics = artifacts::read_topics(s.out, records);
  const auto split = privacy_split(ctx, records);
  const auto model = stage_privacy_train(ctx, records, topics.labels, topics.label_set, split);
  artifacts::write_privacy_model(s.out, model);
  std::cout << "merged HMM: " << model.hmm.merged.size() << " nodes; PII HMM: " << model.hmm.pii.size()
            << " nodes\n";
  return 0;
}

int cmd_privacy_score(const Globals& g) {
  auto s = open_session(g);
  Context ctx(s.cfg, s.opts);
  const auto records = artifacts::read_posts(s.out);
  const auto phases = artifacts::read_periods(s.out, records);
  const auto topics = artifacts::read_topics(s.out, records);
  const auto model = artifacts::read_privacy_model(s.out);
  const auto split = privacy_split(ctx, records);
  auto r = stage_privacy_score(ctx, model, records, phases, topics.labels, split);
  write_tables(s, std::vector<Table>{r.cdf, r.risk_vs_n, r.topics});
  write_traces(s, r.traces);
  return 0;
}

int cmd_urls(const Globals& g) {
  auto s = open_session(g);
  Context ctx(s.cfg, s.opts);
  const auto records = artifacts::read_posts(s.out);
  const auto phases = artifacts::read_periods(s.out, records);
  auto r = stage_urls(ctx, records, phases);
  artifacts::write_domains(s.out, r.dossiers);
  write_tables(s, std::vector<Table>{r.categories});
  return 0;
}

int cmd_vtscore(const Globals& g) {
  auto s = open_session(g);
  Context ctx(s.cfg, s.opts);
  auto dossiers = artifacts::read_domains(s.out);
  auto r = stage_vtscore(ctx, dossiers);
  write_tables(s, std::vector<Table>{r.scores, r.tiers, r.suspicious_categories});
  return 0;
}

int cmd_report(const Globals& g) {
  auto s = open_session(g);
  const auto tables = artifacts::read_tables(s.out);
  std::size_t problems = 0;
  for (const auto& t : tables) {
    for (const auto& e : validate_table(t)) {
      std::cerr << e << "\n";
      ++problems;
    }
  }
  if (problems) throw StageError("report", std::to_string(problems) + " schema violations");
  write_tables(s, tables);
  std::cout << tables.size() << " tables schema-valid in " << s.out.string() << "\n";
  return 0;
}

int cmd_run(const Globals& g) {
  auto s = open_session(g);
  RunState state;
  const auto bundle = run_pipeline(s.cfg, s.opts, &state);
  emit(bundle, s.out, s.format);
  artifacts::write_posts(s.out, state.ingest.records);
  artifacts::write_periods(s.out, state.ingest.records, state.periods.phases);
  artifacts::write_topics(s.out, state.ingest.records, state.topics);
  artifacts::write_privacy_model(s.out, *state.privacy_model);
  artifacts::write_domains(s.out, state.dossiers);
  std::cout << bundle.tables.size() << " tables written to " << s.out.string();
  if (!bundle.warnings.empty()) std::cout << " (" << bundle.warnings.size() << " warnings)";
  std::cout << "\n";
  return 0;
}

int cmd_validate(const Globals& g) {
  validate_config(g.config);
  std::cout << "configuration OK\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"privlens: privacy and security analytics for social-media corpora"};
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1);

  Globals g;
  app.add_option("-c,--config", g.config, "pipeline configuration (JSON)");
  app.add_option("-o,--out", g.out, "output directory (overrides the config)");
  app.add_option("--format", g.format, "output format: csv or json");
  app.add_option("--threads", g.threads, "worker threads; 1 is the bit-reproducible path")->check(CLI::PositiveNumber);
  app.add_flag("--offline", g.offline, "forbid all network use");
  app.add_flag("-q,--quiet", g.quiet, "no progress messages");

  std::function<int()> action;
  auto sub = [&](const char* name, const char* help, int (*fn)(const Globals&)) {
    auto* c = app.add_subcommand(name, help);
    c->callback([&action, fn, &g] { action = [fn, &g] { return fn(g); }; });
    return c;
  };
  sub("ingest", "load and filter the corpus", cmd_ingest);
  sub("periods", "assign lockdown phases and infection rates", cmd_periods);
  sub("hashtags", "cluster hashtagged posts", cmd_hashtags);
  sub("topics", "fit the topic model", cmd_topics);
  sub("sentiment", "aggregate sentiment per topic and phase", cmd_sentiment);
  auto* priv = app.add_subcommand("privacy", "privacy risk models");
  priv->require_subcommand(1);
  priv->add_subcommand("train", "build the privacy HMMs")->callback([&] {
    action = [&] { return cmd_privacy_train(g); };
  });
  priv->add_subcommand("score", "score test sequences")->callback([&] {
    action = [&] { return cmd_privacy_score(g); };
  });
  sub("urls", "extract and categorise shared domains", cmd_urls);
  sub("vtscore", "score domains from scanner reports", cmd_vtscore);
  sub("report", "validate emitted tables against their schemas", cmd_report);
  sub("run", "run the full pipeline", cmd_run);
  sub("validate", "check the configuration and exit", cmd_validate);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : kExitConfig;
  }

  try {
    return action();
  } catch (const ConfigError& e) {
    std::cerr << "privlens: " << e.what() << "\n";
    return kExitConfig;
  } catch (const StageError& e) {
    std::cerr << "privlens: " << e.what() << "\n";
    return kExitStage;
  } catch (const std::exception& e) {
    std::cerr << "privlens: " << e.what() << "\n";
    return kExitStage;
  }
}
