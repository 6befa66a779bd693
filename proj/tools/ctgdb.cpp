// ctgdb: registry XML -> normalized relational tables -> safety screening.

#include <iostream>
#include <string>
#include <thread>

#include <CLI11.hpp>

#include "ctgdb/pipeline.hpp"

namespace {

struct Flags {
  std::string config;
  std::string in, out, vocab, dialect, db_uri;
  double fuzzy_threshold = 0.0;
  bool no_fuzzy = false;
  std::vector<std::string> event_groups;
  bool no_phase_restrict = false;
  bool serious_only = false;
  int threads = 0;
};

struct Options {
  CLI::Option* in;
  CLI::Option* out;
  CLI::Option* vocab;
  CLI::Option* dialect;
  CLI::Option* threshold;
  CLI::Option* event_group;
  CLI::Option* db_uri;
  CLI::Option* threads;
};

Options add_common(CLI::App* app, Flags& f) {
  Options o;
  app->add_option("--config", f.config, "key = value config file; flags override it");
  o.in = app->add_option("--in", f.in, "directory of registry XML files");
  o.out = app->add_option("--out", f.out, "output directory");
  o.vocab = app->add_option("--vocab", f.vocab, "terminology TSV");
  o.dialect = app->add_option("--dialect", f.dialect, "mysql | postgresql | both");
  o.threshold = app->add_option("--fuzzy-threshold", f.fuzzy_threshold, "Dice threshold in (0, 1]");
  app->add_flag("--no-fuzzy", f.no_fuzzy, "exact matching only");
  o.event_group = app->add_option("--event-group", f.event_groups, "event group TSV (repeatable)");
  app->add_flag("--no-phase-restrict", f.no_phase_restrict, "product aggregates over all phases");
  app->add_flag("--serious-only", f.serious_only, "count serious events only");
  o.db_uri = app->add_option("--db-uri", f.db_uri, "sqlite:<path> (else $CTGDB_DB_URI)");
  o.threads = app->add_option("--threads", f.threads, "worker threads");
  return o;
}

ctgdb::PipelineConfig resolve(const Flags& f, const Options& o, int verbosity) {
  ctgdb::PipelineConfig cfg;
  if (!f.config.empty()) cfg = ctgdb::load_config_file(f.config);
  if (o.in->count()) cfg.input_dir = f.in;
  if (o.out->count()) cfg.output_dir = f.out;
  if (o.vocab->count()) cfg.vocabulary_path = f.vocab;
  if (o.dialect->count()) cfg.dialects = ctgdb::parse_dialect_list(f.dialect);
  if (o.threshold->count()) cfg.normalizer.fuzzy_threshold = f.fuzzy_threshold;
  if (f.no_fuzzy) cfg.normalizer.enable_fuzzy = false;
  if (o.event_group->count()) cfg.event_group_files.assign(f.event_groups.begin(), f.event_groups.end());
  if (f.no_phase_restrict) cfg.phase_restrict = false;
  if (f.serious_only) cfg.serious_only = true;
  if (o.db_uri->count()) cfg.db_uri = f.db_uri;
  if (o.threads->count()) {
    if (f.threads < 1) throw ctgdb::ConfigError("--threads must be >= 1");
    cfg.threads = static_cast<unsigned>(f.threads);
  } else if (f.config.empty()) {
    cfg.threads = std::max(1u, std::thread::hardware_concurrency());
  }
  if (verbosity > cfg.verbosity) cfg.verbosity = verbosity;
  cfg.normalizer.validate();
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Clinical trial registry to relational database pipeline"};
  app.require_subcommand(1);
  int verbosity = 0;
  app.add_flag("-v,--verbose", verbosity, "more logging (repeatable)");

  using Command = int (*)(const ctgdb::PipelineConfig&, std::ostream&, std::ostream&);
  struct Sub {
    const char* name;
    const char* help;
    Command run;
  };
  const Sub subs[] = {
      {"ingest", "parse and filter registry XML into the record store", ctgdb::cmd_ingest},
      {"normalize", "map AE terms and conditions onto the vocabulary", ctgdb::cmd_normalize},
      {"emit", "write table CSVs and DDL", ctgdb::cmd_emit},
      {"load", "apply DDL and bulk-load the CSVs", ctgdb::cmd_load},
      {"screen", "event-group screening against pooled placebo", ctgdb::cmd_screen},
      {"all", "run every stage in order", ctgdb::cmd_all},
  };

  Flags flags;
  std::vector<std::pair<CLI::App*, Options>> registered;
  for (const auto& s : subs) {
    CLI::App* sub = app.add_subcommand(s.name, s.help);
    sub->add_flag("-v,--verbose", verbosity, "more logging (repeatable)");
    registered.emplace_back(sub, add_common(sub, flags));
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : ctgdb::kExitInput;
  }

  for (std::size_t i = 0; i < registered.size(); ++i) {
    auto& [sub, opts] = registered[i];
    if (!sub->parsed()) continue;
    ctgdb::PipelineConfig cfg;
    try {
      cfg = resolve(flags, opts, verbosity);
    } catch (const std::exception& e) {
      std::cerr << "error: " << e.what() << "\n";
      return ctgdb::kExitInput;
    }
    return subs[i].run(cfg, std::cout, std::cerr);
  }
  return ctgdb::kExitInput;
}
