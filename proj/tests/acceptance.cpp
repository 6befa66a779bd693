// Acceptance runner: one PASS/FAIL line per criterion, exit status 1 when
// any criterion fails.

#include <chrono>
#include <cstdio>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <sstream>

#include "canon_cases.hpp"
#include "ctgdb/coverage.hpp"
#include "ctgdb/csv.hpp"
#include "ctgdb/database.hpp"
#include "ctgdb/pipeline.hpp"
#include "ctgdb/registry.hpp"
#include "ctgdb/schema.hpp"
#include "ctgdb/text.hpp"
#include "fuzzy_property.hpp"
#include "oracles.hpp"
#include "stats_property.hpp"

namespace fs = std::filesystem;
using namespace ctgdb;

namespace {

struct Verdict {
  bool pass = false;
  std::string detail;
};

Verdict fail(std::string why) { return {false, std::move(why)}; }

fs::path src(const std::string& rel) { return oracle::source_dir() / rel; }

PipelineConfig fixture_config(const fs::path& in, const fs::path& out) {
  PipelineConfig c;
  c.input_dir = in;
  c.vocabulary_path = src("data/vocabulary.synthetic.tsv");
  c.output_dir = out;
  c.event_group_files = {src("data/event_groups/gi_hemorrhage.tsv")};
  c.threads = 2;
  return c;
}

std::string fmt(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

Verdict table_one() {
  CoverageReport r;
  r.unique_exact = 25407;
  r.unique_fuzzy = 56340;
  r.unique_unmapped = 56285;
  r.weighted_exact = 24382112;
  r.weighted_fuzzy = 1717553;
  r.weighted_unmapped = 1370032;
  struct Want {
    const char* what;
    double got, want;
  };
  Want checks[] = {
      {"unique exact", r.unique_pct(MatchStage::exact), 18.41},
      {"unique fuzzy", r.unique_pct(MatchStage::fuzzy), 40.82},
      {"unique mapped", r.unique_mapped_pct(), 59.22},
      {"weighted exact", r.weighted_pct(MatchStage::exact), 88.76},
      {"weighted fuzzy", r.weighted_pct(MatchStage::fuzzy), 6.25},
      {"weighted mapped", r.weighted_mapped_pct(), 95.01},
  };
  std::string got;
  for (const auto& c : checks) {
    if (std::fabs(c.got - c.want) > 0.01) {
      return fail(std::string(c.what) + " " + fmt(c.got, 4) + " vs " + fmt(c.want, 2));
    }
    got += (got.empty() ? "" : "/") + fmt(c.got, 2);
  }
  return {true, got};
}

Verdict fuzzy_oracle() {
  fuzzy_property::Outcome out;
  std::uint64_t seed = 1;
  for (; seed <= 1000; ++seed) fuzzy_property::run_case(seed, 60, 60, out);
  for (std::uint64_t k = 0; k < 5; ++k) fuzzy_property::run_case(50000 + k, 500, 500, out);
  if (out.mismatches) {
    return fail(std::to_string(out.mismatches) + " of " + std::to_string(out.queries) +
                " queries disagree; first: " + out.first_mismatch);
  }
  return {true, std::to_string(out.cases) + " cases, " + std::to_string(out.queries) + " queries (" +
                    std::to_string(out.fuzzy) + " fuzzy), 100% agreement"};
}

Verdict canonicalization() {
  auto table = canon_cases::table();
  std::size_t ok = 0;
  std::string first;
  for (const auto& c : table) {
    auto got = canonicalize(c.raw);
    bool good = got.text == c.text && got.stripped_suffix == c.suffix &&
                canonicalize(got.text).text == got.text;
    if (good) {
      ++ok;
    } else if (first.empty()) {
      first = "'" + c.raw + "' -> '" + got.text + "'";
    }
  }
  if (table.size() != 200) return fail("table has " + std::to_string(table.size()) + " rows");
  if (ok != table.size()) return fail(std::to_string(table.size() - ok) + " rows fail; first " + first);
  return {true, "200/200 rows"};
}

Verdict statistics() {
  std::mt19937_64 rng(20240611);
  stats_property::Outcome out;
  for (int i = 0; i < 500; ++i) stats_property::run_input(rng, out);
  if (out.mismatches) return fail(std::to_string(out.mismatches) + " mismatches; first " + out.first_mismatch);
  return {true, "500 inputs, " + std::to_string(out.checks) + " checks, " +
                    std::to_string(out.corrected_cases) + " zero-cell ORs"};
}

Verdict end_to_end() {
  auto out = oracle::scratch_dir("acc-e2e");
  std::ostringstream sink;
  int rc = cmd_all(fixture_config(src("data/synthetic_corpus"), out), sink, sink);
  if (rc != kExitOk) return fail("cmd_all exit " + std::to_string(rc) + ": " + sink.str());
  std::string got = oracle::slurp(out / "screening/gi_hemorrhage.csv");
  if (got != oracle::slurp(src("tests/golden/gi_hemorrhage.screening.csv"))) {
    return fail("screening CSV differs from golden");
  }

  // Recompute the flags from the designed per-arm counts.
  auto design = read_tsv_file(src("tests/golden/synthetic_arms.tsv"));
  std::vector<double> placebo;
  std::map<std::string, double> p;
  for (std::size_t i = 1; i < design.size(); ++i) {
    const auto& f = design[i].fields;
    double n_ae = std::stod(f[5]), n = std::stod(f[6]);
    p[f[1]] = std::min(n_ae, n) / n;
    if (f[4] == "true" && n_ae <= n) placebo.push_back(n_ae / n);
  }
  double q75 = oracle::percentile(placebo, 0.75);
  double mx = *std::max_element(placebo.begin(), placebo.end());
  auto doc = parse_csv(got);
  std::size_t flagged = 0;
  for (const auto& r : doc.rows) {
    const std::string& key = *r[3];
    if (!p.count(key)) return fail("arm " + key + " not in design table");
    bool want_q = p[key] > q75, want_m = p[key] > mx;
    if ((*r[10] == "true") != want_q || (*r[11] == "true") != want_m) return fail("flags differ for " + key);
    flagged += want_q;
  }
  if (doc.rows.size() != p.size()) return fail("row count differs from design table");
  return {true, std::to_string(doc.rows.size()) + " arms, " + std::to_string(flagged) +
                    " above q75 " + fmt(q75, 6) + ", golden identical"};
}

Verdict determinism() {
  auto files = std::vector<fs::path>{};
  for (const auto& e : fs::directory_iterator(src("data/synthetic_corpus"))) files.push_back(e.path());
  std::sort(files.begin(), files.end());
  std::vector<std::vector<ManifestArtifact>> runs;
  for (unsigned k = 0; k < 2; ++k) {
    auto in = oracle::scratch_dir("acc-det-in" + std::to_string(k));
    auto out = oracle::scratch_dir("acc-det-out" + std::to_string(k));
    std::mt19937_64 rng(100 + k);
    std::shuffle(files.begin(), files.end(), rng);
    for (const auto& f : files) fs::copy_file(f, in / f.filename());
    auto cfg = fixture_config(in, out);
    cfg.threads = 1 + 3 * k;
    cfg.db_uri = "sqlite:" + (out / "db.sqlite").string();
    std::ostringstream sink;
    int rc = cmd_all(cfg, sink, sink);
    if (rc != kExitOk) return fail("run " + std::to_string(k) + " exit " + std::to_string(rc));
    runs.push_back(read_manifest_artifacts(out / artifacts::kRunManifest));
  }
  if (runs[0].size() != runs[1].size()) return fail("artifact lists differ in length");
  for (std::size_t i = 0; i < runs[0].size(); ++i) {
    const auto& a = runs[0][i];
    const auto& b = runs[1][i];
    if (a.path != b.path || a.sha256 != b.sha256 || a.bytes != b.bytes) return fail("differs at " + a.path);
  }
  return {true, std::to_string(runs[0].size()) + " artifacts, identical checksums"};
}

Verdict round_trip() {
  auto out = oracle::scratch_dir("acc-load");
  auto cfg = fixture_config(src("data/synthetic_corpus"), out);
  cfg.event_group_files.clear();
  std::ostringstream sink;
  if (int rc = cmd_all(cfg, sink, sink); rc != kExitOk) return fail("emit exit " + std::to_string(rc));
  std::string detail;
  for (auto d : {Dialect::mysql, Dialect::postgresql}) {
    auto db_path = out / ("rt." + std::string(to_string(d)) + ".sqlite");
    auto db = Database::open("sqlite:" + db_path.string());
    db.exec(oracle::slurp(out / ddl_file_name(d)));
    auto m = bulk_load(db, out / artifacts::kTablesDir, ctgdb_schemas());
    if (!m.success()) return fail(std::string(to_string(d)) + ": " + m.failure->message);
    std::size_t rows = 0;
    for (const auto& t : m.tables) {
      auto csv_rows = read_csv_file(out / artifacts::kTablesDir / (t.table + ".csv")).rows.size();
      if (count_rows(db, t.table) != static_cast<std::int64_t>(csv_rows) || t.rows_loaded != csv_rows) {
        return fail(std::string(to_string(d)) + ": row count mismatch in " + t.table);
      }
      rows += csv_rows;
    }
    std::int64_t orphans = 0;
    for (const auto& o : count_orphans(db, ctgdb_schemas())) orphans += o.orphans;
    if (orphans) return fail(std::string(to_string(d)) + ": " + std::to_string(orphans) + " orphans");
    detail += (detail.empty() ? "" : "; ") + std::string(to_string(d)) + " " + std::to_string(m.tables.size()) +
              " tables, " + std::to_string(rows) + " rows, 0 orphans";
  }
  return {true, detail};
}

Verdict conservation() {
  std::mt19937_64 rng(77);
  std::bernoulli_distribution flip(0.3), bad(0.05);
  std::size_t studies = 0, excluded = 0;
  for (int round = 0; round < 20; ++round) {
    auto dir = oracle::scratch_dir("acc-conserve");
    std::map<std::string, std::string> expected;
    for (int i = 0; i < 40; ++i) {
      oracle::StudyDesign d;
      d.nct = "NCT8" + std::to_string(1000000 + round * 1000 + i);
      d.withheld = flip(rng);
      d.has_eligibility = !flip(rng);
      d.has_conditions = !flip(rng);
      d.malformed = bad(rng);
      oracle::spit(dir / (d.nct + ".xml"), oracle::design_xml(d));
      if (!d.malformed) expected[d.nct] = d.expected_reason();
    }
    auto r = ingest_archive(dir);
    const auto& rep = r.report;
    if (rep.total_seen != rep.included + rep.excluded_total()) return fail("report does not balance");
    if (rep.total_seen != expected.size() || r.decisions.size() != expected.size()) {
      return fail("round " + std::to_string(round) + ": counted " + std::to_string(rep.total_seen) +
                  " of " + std::to_string(expected.size()));
    }
    std::map<std::string, std::uint64_t> per_rule;
    for (const auto& dec : r.decisions) {
      std::string got = dec.exclusion ? std::string(to_string(*dec.exclusion)) : "";
      if (got != expected[dec.nct_id]) return fail(dec.nct_id + " excluded as '" + got + "'");
      ++per_rule[got];
    }
    if (per_rule["results_withheld"] != rep.excluded_results_withheld ||
        per_rule["no_eligibility"] != rep.excluded_no_eligibility ||
        per_rule["no_conditions"] != rep.excluded_no_conditions || per_rule[""] != rep.included) {
      return fail("per-rule tallies disagree with decisions");
    }
    studies += rep.total_seen;
    excluded += rep.excluded_total();
  }
  return {true, "20 corpora, " + std::to_string(studies) + " studies, " + std::to_string(excluded) +
                    " excluded, each under its first rule"};
}

}  // namespace

int main() {
  struct Criterion {
    const char* name;
    double budget_s;  // 0: no time limit
    std::function<Verdict()> run;
  };
  const Criterion criteria[] = {
      {"table1-arithmetic", 1, table_one},
      {"fuzzy-oracle-equivalence", 60, fuzzy_oracle},
      {"canonicalization-suite", 0, canonicalization},
      {"statistics-oracle", 10, statistics},
      {"end-to-end-fixture", 30, end_to_end},
      {"determinism", 0, determinism},
      {"round-trip-load", 0, round_trip},
      {"exclusion-conservation", 0, conservation},
  };
  int failures = 0;
  for (const auto& c : criteria) {
    auto t0 = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = c.run();
    } catch (const std::exception& e) {
      v = fail(std::string("exception: ") + e.what());
    }
    double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (v.pass && c.budget_s > 0 && s >= c.budget_s) {
      v = fail("took " + fmt(s, 2) + " s, budget " + fmt(c.budget_s, 0) + " s");
    }
    failures += !v.pass;
    std::cout << (v.pass ? "PASS " : "FAIL ") << c.name << " (" << fmt(s, 3) << " s) " << v.detail << "\n";
  }
  return failures ? 1 : 0;
}
