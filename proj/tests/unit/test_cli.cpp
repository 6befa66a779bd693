#include <gtest/gtest.h>

#include <sys/file.h>
#include <fcntl.h>

#include <cstdlib>

#include "ctgdb/csv.hpp"
#include "ctgdb/pipeline.hpp"
#include "oracles.hpp"

using namespace ctgdb;
namespace fs = std::filesystem;

namespace {

fs::path src(const std::string& rel) { return oracle::source_dir() / rel; }

PipelineConfig fixture_config(const fs::path& out) {
  PipelineConfig c;
  c.input_dir = src("data/synthetic_corpus");
  c.vocabulary_path = src("data/vocabulary.synthetic.tsv");
  c.output_dir = out;
  c.event_group_files = {src("data/event_groups/gi_hemorrhage.tsv")};
  return c;
}

struct Sink {
  std::ostringstream out, log;
};

int run(int (*cmd)(const PipelineConfig&, std::ostream&, std::ostream&), const PipelineConfig& c,
        Sink* sink = nullptr) {
  Sink local;
  Sink& s = sink ? *sink : local;
  return cmd(c, s.out, s.log);
}

std::map<std::string, std::string> checksums(const fs::path& out) {
  std::map<std::string, std::string> m;
  for (const auto& a : scan_artifacts(out)) m[a.path] = a.sha256;
  return m;
}

// Scoped environment override.
class EnvGuard {
 public:
  explicit EnvGuard(const char* name) : name_(name) {
    if (const char* v = std::getenv(name)) old_ = v;
    ::unsetenv(name);
  }
  ~EnvGuard() {
    if (old_) ::setenv(name_, old_->c_str(), 1);
  }

 private:
  const char* name_;
  std::optional<std::string> old_;
};

}  // namespace

TEST(Config, TextRoundTrip) {
  PipelineConfig c;
  c.input_dir = "/data/in dir";
  c.vocabulary_path = "v.tsv";
  c.output_dir = "out";
  c.ethnicity_map_path = "eth.tsv";
  c.normalizer.fuzzy_threshold = 0.1 + 0.2;  // not representable in 6 decimals
  c.normalizer.enable_fuzzy = false;
  c.normalizer.min_candidate_bigram_overlap = 3;
  c.normalizer.strip_grading = false;
  c.dialects = {Dialect::postgresql};
  c.db_uri = "sqlite:/tmp/x.db";
  c.event_group_files = {"a.tsv", "b.tsv"};
  c.phase_restrict = false;
  c.serious_only = true;
  c.verbosity = 2;
  c.threads = 3;
  auto back = parse_config_text(c.to_text());
  EXPECT_EQ(back.to_text(), c.to_text());
  EXPECT_EQ(back.normalizer.fuzzy_threshold, c.normalizer.fuzzy_threshold);
  EXPECT_EQ(back.event_group_files.size(), 2u);
  EXPECT_EQ(back.db_uri, c.db_uri);
  EXPECT_EQ(PipelineConfig{}.to_text(), parse_config_text(PipelineConfig{}.to_text()).to_text());
}

TEST(Config, CommentsAndErrors) {
  auto c = parse_config_text("# comment\n\n in = x \nfuzzy_threshold=0.7\ndialect = both\n");
  EXPECT_EQ(c.input_dir, "x");
  EXPECT_EQ(c.normalizer.fuzzy_threshold, 0.7);
  EXPECT_EQ(c.dialects.size(), 2u);
  EXPECT_THROW(parse_config_text("colour = blue\n"), ConfigError);
  EXPECT_THROW(parse_config_text("fuzzy_threshold = high\n"), ConfigError);
  EXPECT_THROW(parse_config_text("just text\n"), ConfigError);
  EXPECT_THROW(parse_config_text("dialect = oracle\n"), std::invalid_argument);
  try {
    parse_config_text("in = a\nbogus = 1\n");
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos);
  }
}

TEST(Config, DbUriFromEnvironment) {
  EnvGuard g("CTGDB_DB_URI");
  PipelineConfig c;
  EXPECT_FALSE(effective_db_uri(c));
  ::setenv("CTGDB_DB_URI", "sqlite::memory:", 1);
  EXPECT_EQ(effective_db_uri(c), "sqlite::memory:");
  c.db_uri = "sqlite:/x";
  EXPECT_EQ(effective_db_uri(c), "sqlite:/x");
  ::unsetenv("CTGDB_DB_URI");
}

TEST(Pipeline, FullRun) {
  EnvGuard g("CTGDB_DB_URI");
  auto out = oracle::scratch_dir("cli-full");
  auto c = fixture_config(out);
  c.db_uri = "sqlite:" + (out.parent_path() / (out.filename().string() + ".sqlite")).string();
  fs::remove(c.db_uri->substr(7));
  Sink s;
  ASSERT_EQ(run(cmd_all, c, &s), kExitOk) << s.log.str();
  for (const char* f : {artifacts::kStudies, artifacts::kExclusionReport, artifacts::kExcludedStudies,
                        artifacts::kWarnings, artifacts::kTermMapping, artifacts::kConditionMapping,
                        artifacts::kCoverageText, artifacts::kCoverageCsv, artifacts::kLoadManifest,
                        artifacts::kRunManifest}) {
    EXPECT_TRUE(fs::exists(out / f)) << f;
  }
  EXPECT_TRUE(fs::exists(out / ddl_file_name(Dialect::mysql)));
  EXPECT_TRUE(fs::exists(out / ddl_file_name(Dialect::postgresql)));
  EXPECT_EQ(oracle::slurp(out / "screening/gi_hemorrhage.csv"),
            oracle::slurp(src("tests/golden/gi_hemorrhage.screening.csv")));
  std::string manifest = oracle::slurp(out / artifacts::kRunManifest);
  EXPECT_NE(manifest.find("record=run command=all"), std::string::npos);
  EXPECT_NE(manifest.find("status=success"), std::string::npos);
  EXPECT_NE(oracle::slurp(out / artifacts::kLoadManifest).find("status=success"), std::string::npos);
  // Manifest lists every artifact with its current checksum.
  auto listed = read_manifest_artifacts(out / artifacts::kRunManifest);
  std::map<std::string, std::string> from_manifest;
  for (const auto& a : listed) from_manifest[a.path] = a.sha256;
  EXPECT_EQ(from_manifest, checksums(out));
  EXPECT_NE(s.out.str().find("Adverse event term coverage"), std::string::npos);
}

TEST(Pipeline, RerunAndReplayGiveIdenticalChecksums) {
  auto out = oracle::scratch_dir("cli-rerun");
  auto c = fixture_config(out);
  ASSERT_EQ(run(cmd_all, c), kExitOk);
  auto first = checksums(out);
  auto saved = oracle::scratch_dir("cli-rerun-saved") / "manifest.txt";
  fs::copy_file(out / artifacts::kRunManifest, saved);
  ASSERT_EQ(run(cmd_all, c), kExitOk);
  EXPECT_EQ(checksums(out), first);

  // Replay from the manifest into a wiped directory.
  fs::remove_all(out);
  auto replay = read_manifest_config(saved);
  EXPECT_EQ(replay.to_text(), c.to_text());
  ASSERT_EQ(run(cmd_all, replay), kExitOk);
  EXPECT_EQ(checksums(out), first);

  // A different output directory changes nothing either.
  auto other = oracle::scratch_dir("cli-rerun-other");
  c.output_dir = other;
  ASSERT_EQ(run(cmd_all, c), kExitOk);
  EXPECT_EQ(checksums(other), first);
}

TEST(Pipeline, StagesRunInIsolation) {
  auto a = oracle::scratch_dir("cli-stage-a");
  auto b = oracle::scratch_dir("cli-stage-b");
  ASSERT_EQ(run(cmd_all, fixture_config(a)), kExitOk);
  auto c = fixture_config(b);
  ASSERT_EQ(run(cmd_ingest, c), kExitOk);
  ASSERT_EQ(run(cmd_normalize, c), kExitOk);
  ASSERT_EQ(run(cmd_emit, c), kExitOk);
  ASSERT_EQ(run(cmd_screen, c), kExitOk);
  auto ca = checksums(a), cb = checksums(b);
  EXPECT_EQ(ca, cb);
}

TEST(Pipeline, StageNeedsItsInputs) {
  auto out = oracle::scratch_dir("cli-needs");
  auto c = fixture_config(out);
  EXPECT_EQ(run(cmd_normalize, c), kExitInput);
  EXPECT_EQ(run(cmd_emit, c), kExitInput);
  EXPECT_EQ(run(cmd_screen, c), kExitInput);
}

TEST(Pipeline, EmitTwiceIsByteIdentical) {
  auto out = oracle::scratch_dir("cli-emit2");
  auto c = fixture_config(out);
  ASSERT_EQ(run(cmd_all, c), kExitOk);
  auto first = checksums(out);
  ASSERT_EQ(run(cmd_emit, c), kExitOk);
  auto second = checksums(out);
  for (const auto& [path, sum] : first) {
    if (path.rfind("tables/", 0) == 0 || path.rfind("schema.", 0) == 0) {
      EXPECT_EQ(second.at(path), sum) << path;
    }
  }
}

TEST(Pipeline, MissingInputDirectory) {
  auto c = fixture_config(oracle::scratch_dir("cli-noin"));
  c.input_dir = src("no/such/dir");
  Sink s;
  EXPECT_EQ(run(cmd_all, c, &s), kExitInput);
  EXPECT_NE(s.log.str().find("no/such/dir"), std::string::npos);
  EXPECT_EQ(run(cmd_ingest, c), kExitInput);
}

TEST(Pipeline, MissingVocabulary) {
  auto c = fixture_config(oracle::scratch_dir("cli-novocab"));
  c.vocabulary_path = src("missing.tsv");
  EXPECT_EQ(run(cmd_all, c), kExitInput);
}

TEST(Pipeline, ThresholdOutOfRange) {
  auto out = oracle::scratch_dir("cli-threshold");
  auto c = fixture_config(out);
  c.normalizer.fuzzy_threshold = 1.01;
  Sink s;
  EXPECT_EQ(run(cmd_all, c, &s), kExitInput);
  // Validation happens before any stage writes.
  EXPECT_FALSE(fs::exists(out / artifacts::kStudies));
}

TEST(Pipeline, LoadWithoutConnection) {
  EnvGuard g("CTGDB_DB_URI");
  auto c = fixture_config(oracle::scratch_dir("cli-nouri"));
  ASSERT_EQ(run(cmd_all, c), kExitOk);
  Sink s;
  EXPECT_EQ(run(cmd_load, c, &s), kExitInput);
  EXPECT_NE(s.log.str().find("CTGDB_DB_URI"), std::string::npos);
  c.db_uri = "mysql://host/db";
  EXPECT_EQ(run(cmd_load, c), kExitInput);
}

TEST(Pipeline, LoadDisabledTouchesNoDatabase) {
  EnvGuard g("CTGDB_DB_URI");
  auto out = oracle::scratch_dir("cli-noload");
  ASSERT_EQ(run(cmd_all, fixture_config(out)), kExitOk);
  EXPECT_FALSE(fs::exists(out / artifacts::kLoadManifest));
  for (const auto& e : fs::recursive_directory_iterator(out)) {
    EXPECT_NE(e.path().extension(), ".sqlite") << e.path();
    EXPECT_NE(e.path().extension(), ".db") << e.path();
  }
}

TEST(Pipeline, LoadFromEnvironment) {
  EnvGuard g("CTGDB_DB_URI");
  auto out = oracle::scratch_dir("cli-envload");
  auto db = out.parent_path() / (out.filename().string() + ".sqlite");
  fs::remove(db);
  ::setenv("CTGDB_DB_URI", ("sqlite:" + db.string()).c_str(), 1);
  EXPECT_EQ(run(cmd_all, fixture_config(out)), kExitOk);
  EXPECT_TRUE(fs::exists(db));
  EXPECT_TRUE(fs::exists(out / artifacts::kLoadManifest));
  ::unsetenv("CTGDB_DB_URI");
}

TEST(Pipeline, BrokenTableFailsLoad) {
  auto out = oracle::scratch_dir("cli-badload");
  auto c = fixture_config(out);
  ASSERT_EQ(run(cmd_all, c), kExitOk);
  auto doc = read_csv_file(out / "tables/ct_arms.csv");
  doc.rows[0][1] = "NCT00000000";
  CsvWriter w(doc.header);
  for (auto& r : doc.rows) w.add(r);
  oracle::spit(out / "tables/ct_arms.csv", w.text());
  c.db_uri = "sqlite::memory:";
  Sink s;
  EXPECT_EQ(run(cmd_load, c, &s), kExitLoad);
  std::string m = oracle::slurp(out / artifacts::kLoadManifest);
  EXPECT_NE(m.find("status=failed"), std::string::npos);
  EXPECT_NE(m.find("failed_table=ct_arms"), std::string::npos);
  EXPECT_NE(m.find("failed_row=1"), std::string::npos);
}

TEST(Pipeline, NoPlaceboIsAnalyticFailure) {
  auto in = oracle::scratch_dir("cli-noplacebo-in");
  for (int i = 0; i < 3; ++i) {
    oracle::StudyDesign d;
    d.nct = "NCT5000000" + std::to_string(i);
    oracle::spit(in / (d.nct + ".xml"), oracle::design_xml(d));
  }
  auto c = fixture_config(oracle::scratch_dir("cli-noplacebo"));
  c.input_dir = in;
  Sink s;
  EXPECT_EQ(run(cmd_all, c, &s), kExitAnalytic);
  EXPECT_NE(s.log.str().find("placebo"), std::string::npos) << s.log.str();
  EXPECT_NE(oracle::slurp(c.output_dir / artifacts::kRunManifest).find("exit_code=4"), std::string::npos);
}

TEST(Pipeline, UnknownPtInGroup) {
  auto dir = oracle::scratch_dir("cli-badgroup");
  oracle::spit(dir / "g.tsv", "group_name\tpt_code\nbad\t90100001\n");  // an LLT
  auto c = fixture_config(dir / "out");
  c.event_group_files = {dir / "g.tsv"};
  EXPECT_EQ(run(cmd_all, c), kExitInput);
  c.event_group_files = {dir / "missing.tsv"};
  EXPECT_EQ(run(cmd_all, c), kExitInput);
}

TEST(Pipeline, NoFuzzyGivesNoFuzzyRows) {
  auto out = oracle::scratch_dir("cli-nofuzzy");
  auto c = fixture_config(out);
  c.normalizer.enable_fuzzy = false;
  ASSERT_EQ(run(cmd_all, c), kExitOk);
  for (const char* f : {artifacts::kTermMapping, artifacts::kConditionMapping}) {
    auto doc = read_csv_file(out / f);
    auto col = std::find(doc.header.begin(), doc.header.end(), "stage") - doc.header.begin();
    for (const auto& r : doc.rows) EXPECT_NE(*r[col], "fuzzy");
  }
  auto cov = oracle::slurp(out / artifacts::kCoverageCsv);
  EXPECT_NE(cov.find("\nfuzzy,0,"), std::string::npos) << cov;
}

TEST(Pipeline, LockedOutputDirectory) {
  auto out = oracle::scratch_dir("cli-lock");
  int fd = ::open((out / artifacts::kLockFile).c_str(), O_CREAT | O_RDWR, 0644);
  ASSERT_GE(fd, 0);
  ASSERT_EQ(::flock(fd, LOCK_EX | LOCK_NB), 0);
  Sink s;
  EXPECT_EQ(run(cmd_ingest, fixture_config(out), &s), kExitInput);
  ::flock(fd, LOCK_UN);
  ::close(fd);
  EXPECT_EQ(run(cmd_ingest, fixture_config(out)), kExitOk);
}

TEST(Pipeline, ExcludedStudiesListed) {
  auto out = oracle::scratch_dir("cli-excluded");
  ASSERT_EQ(run(cmd_ingest, fixture_config(out)), kExitOk);
  auto doc = read_csv_file(out / artifacts::kExcludedStudies);
  EXPECT_EQ(doc.rows.size(), 3u);
  auto report = oracle::slurp(out / artifacts::kExclusionReport);
  EXPECT_NE(report.find("29"), std::string::npos);
}

TEST(RunId, PathIndependentButContentSensitive) {
  auto c = fixture_config("out-a");
  auto d = c;
  d.output_dir = "elsewhere";
  EXPECT_EQ(compute_run_id(c), compute_run_id(d));
  d.normalizer.fuzzy_threshold = 0.9;
  EXPECT_NE(compute_run_id(c), compute_run_id(d));
  EXPECT_EQ(compute_run_id(c).size(), 16u);
}
