// privlens-synth: writes a deterministic synthetic corpus, its manifest and
// (optionally) a scanner-report cache for the generated domains.

#include <CLI11.hpp>

#include <iostream>
#include <string>

#include "privlens/synth.hpp"

int main(int argc, char** argv) {
  CLI::App app{"privlens-synth: deterministic synthetic post corpora"};
  privlens::synth::SynthOptions opts;
  std::string out;
  std::string manifest;
  std::string reports;
  app.add_option("-o,--out", out, "corpus JSONL path")->required();
  app.add_option("-m,--manifest", manifest, "manifest JSON path");
  app.add_option("--reports", reports, "also write a scanner-report cache (JSONL)");
  app.add_option("-n,--posts", opts.posts, "number of posts");
  app.add_option("-u,--users", opts.users, "number of users");
  app.add_option("-s,--seed", opts.seed, "generator seed");
  app.add_option("--zipf", opts.zipf_exponent, "posts-per-user Zipf exponent");
  app.add_option("--pii-rate", opts.pii_rate, "fraction of fresh posts carrying PII");
  CLI11_PARSE(app, argc, argv);

  try {
    const auto corpus = privlens::synth::generate(opts);
    privlens::write_file(out, privlens::corpus::to_jsonl(corpus.records));
    if (!manifest.empty()) privlens::write_file(manifest, corpus.manifest.dump(2) + "\n");
    if (!reports.empty()) {
      const auto r = privlens::synth::generate_reports(opts.seed);
      privlens::write_file(reports, privlens::synth::to_cache(r));
    }
    std::cout << corpus.records.size() << " posts written to " << out << "\n";
  } catch (const std::exception& e) {
    std::cerr << "privlens-synth: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
