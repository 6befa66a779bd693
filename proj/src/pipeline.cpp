#include "ctgdb/pipeline.hpp"

#include <fcntl.h>
#include <sys/file.h>
#include <unistd.h>

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdlib>
#include <map>
#include <set>
#include <ostream>

#include "ctgdb/analytics.hpp"
#include "ctgdb/checksum.hpp"
#include "ctgdb/csv.hpp"
#include "ctgdb/database.hpp"
#include "ctgdb/emit.hpp"
#include "ctgdb/kv.hpp"
#include "ctgdb/record_store.hpp"
#include "ctgdb/registry.hpp"
#include "ctgdb/terminology.hpp"

#ifndef CTGDB_DATA_DIR
#define CTGDB_DATA_DIR "data"
#endif

namespace fs = std::filesystem;

namespace ctgdb {

// ---- config ---------------------------------------------------------------

namespace {

std::string trim(std::string_view s) {
  auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

bool parse_bool(const std::string& v) {
  if (v == "true" || v == "yes" || v == "on" || v == "1") return true;
  if (v == "false" || v == "no" || v == "off" || v == "0") return false;
  throw std::invalid_argument("expected true/false, got '" + v + "'");
}

std::string dialect_list_text(const std::vector<Dialect>& ds) {
  if (ds.size() == 2) return "both";
  return ds.empty() ? "" : std::string(to_string(ds.front()));
}

std::string bool_text(bool b) { return b ? "true" : "false"; }

// Shortest text that reads back to the same double.
std::string exact_real(double v) {
  char buf[64];
  auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

}  // namespace

std::vector<Dialect> parse_dialect_list(std::string_view s) {
  if (s == "both") return {Dialect::mysql, Dialect::postgresql};
  return {parse_dialect(s)};
}

std::string PipelineConfig::to_text() const {
  std::string out;
  auto line = [&](const char* key, const std::string& value) {
    out += key;
    out += " = ";
    out += value;
    out += "\n";
  };
  line("in", input_dir.string());
  line("out", output_dir.string());
  line("vocab", vocabulary_path.string());
  line("ethnicity_map", ethnicity_map_path.string());
  line("fuzzy_threshold", exact_real(normalizer.fuzzy_threshold));
  line("fuzzy", bool_text(normalizer.enable_fuzzy));
  line("min_candidate_bigram_overlap", std::to_string(normalizer.min_candidate_bigram_overlap));
  line("strip_grading", bool_text(normalizer.strip_grading));
  line("dialect", dialect_list_text(dialects));
  line("db_uri", db_uri.value_or(""));
  for (const auto& g : event_group_files) line("event_group", g.string());
  line("phase_restrict", bool_text(phase_restrict));
  line("serious_only", bool_text(serious_only));
  line("verbosity", std::to_string(verbosity));
  line("threads", std::to_string(threads));
  return out;
}

void apply_config_text(PipelineConfig& cfg, std::string_view text) {
  std::size_t lineno = 0;
  bool groups_reset = false;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    auto nl = text.find('\n', pos);
    std::string_view raw = text.substr(pos, nl == std::string_view::npos ? text.npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++lineno;
    std::string line = trim(raw);
    if (line.empty() || line[0] == '#') continue;
    auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("config line " + std::to_string(lineno) + ": expected key = value");
    }
    std::string key = trim(std::string_view(line).substr(0, eq));
    std::string value = trim(std::string_view(line).substr(eq + 1));
    try {
      if (key == "in") {
        cfg.input_dir = value;
      } else if (key == "out") {
        cfg.output_dir = value;
      } else if (key == "vocab") {
        cfg.vocabulary_path = value;
      } else if (key == "ethnicity_map") {
        cfg.ethnicity_map_path = value;
      } else if (key == "fuzzy_threshold") {
        std::size_t used = 0;
        cfg.normalizer.fuzzy_threshold = std::stod(value, &used);
        if (used != value.size()) throw std::invalid_argument("not a number");
      } else if (key == "fuzzy") {
        cfg.normalizer.enable_fuzzy = parse_bool(value);
      } else if (key == "min_candidate_bigram_overlap") {
        cfg.normalizer.min_candidate_bigram_overlap = std::stoul(value);
      } else if (key == "strip_grading") {
        cfg.normalizer.strip_grading = parse_bool(value);
      } else if (key == "dialect") {
        cfg.dialects = parse_dialect_list(value);
      } else if (key == "db_uri") {
        cfg.db_uri = value.empty() ? std::nullopt : std::optional<std::string>(value);
      } else if (key == "event_group") {
        if (!groups_reset) cfg.event_group_files.clear();
        groups_reset = true;
        if (!value.empty()) cfg.event_group_files.emplace_back(value);
      } else if (key == "phase_restrict") {
        cfg.phase_restrict = parse_bool(value);
      } else if (key == "serious_only") {
        cfg.serious_only = parse_bool(value);
      } else if (key == "verbosity") {
        cfg.verbosity = std::stoi(value);
      } else if (key == "threads") {
        int n = std::stoi(value);
        if (n < 1) throw std::invalid_argument("threads must be >= 1");
        cfg.threads = static_cast<unsigned>(n);
      } else {
        throw std::invalid_argument("unknown key");
      }
    } catch (const std::exception& e) {
      throw ConfigError("config line " + std::to_string(lineno) + " (" + key + "): " + e.what());
    }
  }
}

PipelineConfig parse_config_text(std::string_view text) {
  PipelineConfig cfg;
  apply_config_text(cfg, text);
  return cfg;
}

PipelineConfig load_config_file(const fs::path& path) {
  std::string text;
  try {
    text = read_file(path);
  } catch (const std::exception& e) {
    throw ConfigError(e.what());
  }
  return parse_config_text(text);
}

fs::path default_ethnicity_map() { return fs::path(CTGDB_DATA_DIR) / "ethnicity_map.tsv"; }

std::optional<std::string> effective_db_uri(const PipelineConfig& cfg) {
  if (cfg.db_uri && !cfg.db_uri->empty()) return cfg.db_uri;
  if (const char* env = std::getenv("CTGDB_DB_URI"); env && *env) return std::string(env);
  return std::nullopt;
}

std::string ddl_file_name(Dialect d) { return "schema." + std::string(to_string(d)) + ".sql"; }

namespace {

fs::path ethnicity_path(const PipelineConfig& cfg) {
  return cfg.ethnicity_map_path.empty() ? default_ethnicity_map() : cfg.ethnicity_map_path;
}

std::string content_hash(const fs::path& p) {
  std::error_code ec;
  if (!fs::is_regular_file(p, ec)) return "absent";
  return sha256_file(p);
}

}  // namespace

std::string compute_run_id(const PipelineConfig& cfg) {
  std::string basis;
  basis += "fuzzy_threshold=" + exact_real(cfg.normalizer.fuzzy_threshold) + "\n";
  basis += "fuzzy=" + bool_text(cfg.normalizer.enable_fuzzy) + "\n";
  basis += "min_overlap=" + std::to_string(cfg.normalizer.min_candidate_bigram_overlap) + "\n";
  basis += "strip_grading=" + bool_text(cfg.normalizer.strip_grading) + "\n";
  basis += "dialect=" + dialect_list_text(cfg.dialects) + "\n";
  basis += "phase_restrict=" + bool_text(cfg.phase_restrict) + "\n";
  basis += "serious_only=" + bool_text(cfg.serious_only) + "\n";
  basis += "vocab=" + content_hash(cfg.vocabulary_path) + "\n";
  basis += "ethnicity=" + content_hash(ethnicity_path(cfg)) + "\n";
  for (const auto& g : cfg.event_group_files) basis += "group=" + content_hash(g) + "\n";
  // Input files by relative name and content; listing order does not matter.
  std::vector<std::string> inputs;
  std::error_code ec;
  if (fs::is_directory(cfg.input_dir, ec)) {
    for (const auto& e : fs::recursive_directory_iterator(cfg.input_dir, ec)) {
      if (e.is_regular_file() && e.path().extension() == ".xml") {
        inputs.push_back(fs::relative(e.path(), cfg.input_dir).generic_string() + "=" +
                         sha256_file(e.path()));
      }
    }
  }
  std::sort(inputs.begin(), inputs.end());
  for (const auto& i : inputs) basis += "input " + i + "\n";
  return sha256_hex(basis).substr(0, 16);
}

// ---- manifest -------------------------------------------------------------

std::vector<ManifestArtifact> scan_artifacts(const fs::path& output_dir) {
  static const std::set<std::string> top_level = {
      artifacts::kStudies,       artifacts::kExclusionReport, artifacts::kExcludedStudies,
      artifacts::kWarnings,      artifacts::kTermMapping,     artifacts::kConditionMapping,
      artifacts::kCoverageText,  artifacts::kCoverageCsv,     artifacts::kLoadManifest};
  std::vector<ManifestArtifact> out;
  auto add = [&](const fs::path& p) {
    out.push_back({fs::relative(p, output_dir).generic_string(), sha256_file(p),
                   fs::file_size(p)});
  };
  std::error_code ec;
  if (!fs::is_directory(output_dir, ec)) return out;
  for (const auto& e : fs::directory_iterator(output_dir)) {
    const std::string name = e.path().filename().string();
    if (e.is_regular_file()) {
      bool ddl = name.rfind("schema.", 0) == 0 && e.path().extension() == ".sql";
      if (top_level.count(name) || ddl) add(e.path());
    } else if (e.is_directory() && (name == artifacts::kTablesDir || name == artifacts::kScreeningDir)) {
      for (const auto& f : fs::recursive_directory_iterator(e.path())) {
        if (f.is_regular_file()) add(f.path());
      }
    }
  }
  std::sort(out.begin(), out.end(),
            [](const ManifestArtifact& a, const ManifestArtifact& b) { return a.path < b.path; });
  return out;
}

namespace {

void write_run_manifest(const PipelineConfig& cfg, std::string_view command, int code) {
  std::error_code ec;
  if (!fs::is_directory(cfg.output_dir, ec)) return;
  std::string text;
  std::string snapshot = cfg.to_text();
  std::size_t pos = 0;
  while (pos < snapshot.size()) {
    auto nl = snapshot.find('\n', pos);
    std::string line = snapshot.substr(pos, nl - pos);
    pos = nl + 1;
    auto eq = line.find(" = ");
    text += "record=config key=" + kv_quote(line.substr(0, eq)) +
            " value=" + kv_quote(line.substr(eq + 3), true) + "\n";
  }
  for (const auto& a : scan_artifacts(cfg.output_dir)) {
    text += "record=artifact path=" + kv_quote(a.path) + " sha256=" + a.sha256 +
            " bytes=" + std::to_string(a.bytes) + "\n";
  }
  text += "record=run command=" + std::string(command) + " run_id=" + compute_run_id(cfg) +
          " status=" + (code == kExitOk ? "success" : "failed") +
          " exit_code=" + std::to_string(code) + "\n";
  write_file(cfg.output_dir / artifacts::kRunManifest, text);
}

std::vector<std::map<std::string, std::string>> manifest_records(const fs::path& manifest,
                                                                 std::string_view kind) {
  std::vector<std::map<std::string, std::string>> out;
  std::string text = read_file(manifest);
  std::size_t pos = 0;
  while (pos < text.size()) {
    auto nl = text.find('\n', pos);
    if (nl == std::string::npos) nl = text.size();
    std::string_view line(text.data() + pos, nl - pos);
    pos = nl + 1;
    if (line.empty()) continue;
    auto rec = parse_kv_record(line);
    if (rec["record"] == kind) out.push_back(std::move(rec));
  }
  return out;
}

}  // namespace

std::vector<ManifestArtifact> read_manifest_artifacts(const fs::path& manifest) {
  std::vector<ManifestArtifact> out;
  for (auto& r : manifest_records(manifest, "artifact")) {
    out.push_back({r["path"], r["sha256"], std::stoull(r["bytes"])});
  }
  return out;
}

PipelineConfig read_manifest_config(const fs::path& manifest) {
  std::string text;
  for (auto& r : manifest_records(manifest, "config")) text += r["key"] + " = " + r["value"] + "\n";
  return parse_config_text(text);
}

// ---- commands -------------------------------------------------------------

namespace {

// Input/config problem detected by a stage.
struct StageFailure {
  int code;
  std::string message;
};

[[noreturn]] void fail(int code, std::string message) { throw StageFailure{code, std::move(message)}; }

class OutputLock {
 public:
  explicit OutputLock(const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) fail(kExitInput, "cannot create output directory " + dir.string() + ": " + ec.message());
    auto path = dir / artifacts::kLockFile;
    fd_ = ::open(path.c_str(), O_CREAT | O_RDWR | O_CLOEXEC, 0644);
    if (fd_ < 0) fail(kExitInput, "cannot open lock file " + path.string());
    if (::flock(fd_, LOCK_EX | LOCK_NB) != 0) {
      ::close(fd_);
      fd_ = -1;
      fail(kExitInput, "another run holds " + path.string());
    }
  }
  ~OutputLock() {
    if (fd_ >= 0) {
      ::flock(fd_, LOCK_UN);
      ::close(fd_);
    }
  }
  OutputLock(const OutputLock&) = delete;
  OutputLock& operator=(const OutputLock&) = delete;

 private:
  int fd_ = -1;
};

void require_output(const PipelineConfig& cfg) {
  if (cfg.output_dir.empty()) fail(kExitInput, "no output directory given (--out)");
}

void require_file(const fs::path& p, std::string_view what, std::string_view hint) {
  std::error_code ec;
  if (p.empty()) fail(kExitInput, "no " + std::string(what) + " given (" + std::string(hint) + ")");
  if (!fs::is_regular_file(p, ec)) {
    fail(kExitInput, std::string(what) + " not found: " + p.string() + " (" + std::string(hint) + ")");
  }
}

std::vector<StudyRecord> load_studies(const PipelineConfig& cfg) {
  auto p = cfg.output_dir / artifacts::kStudies;
  require_file(p, "study store", "run `ingest` first");
  try {
    return read_study_store(p);
  } catch (const std::exception& e) {
    fail(kExitInput, p.string() + ": " + e.what());
  }
}

TermDictionary load_vocab(const PipelineConfig& cfg) {
  require_file(cfg.vocabulary_path, "vocabulary", "--vocab");
  try {
    return load_dictionary(cfg.vocabulary_path);
  } catch (const std::exception& e) {
    fail(kExitInput, cfg.vocabulary_path.string() + ": " + e.what());
  }
}

std::vector<TermMapping> load_mappings(const PipelineConfig& cfg, const char* name) {
  auto p = cfg.output_dir / name;
  require_file(p, name, "run `normalize` first");
  try {
    return parse_mapping_csv(read_file(p));
  } catch (const std::exception& e) {
    fail(kExitInput, p.string() + ": " + e.what());
  }
}

std::string file_safe(std::string_view name) {
  std::string out;
  for (char c : name) {
    auto u = static_cast<unsigned char>(c);
    out.push_back(std::isalnum(u) || c == '-' || c == '_' || c == '.' ? c : '_');
  }
  return out.empty() ? "group" : out;
}

void clear_dir(const fs::path& dir) {
  std::error_code ec;
  fs::remove_all(dir, ec);
  fs::create_directories(dir);
}

void run_ingest(const PipelineConfig& cfg, std::ostream& out, std::ostream& log) {
  if (cfg.input_dir.empty()) fail(kExitInput, "no input directory given (--in)");
  IngestResult r;
  try {
    r = ingest_archive(cfg.input_dir, IngestConfig{cfg.threads});
  } catch (const IngestError& e) {
    fail(kExitInput, e.what());
  }
  write_study_store(cfg.output_dir / artifacts::kStudies, r.studies);
  write_file(cfg.output_dir / artifacts::kExclusionReport, format_exclusion_report(r.report));
  CsvWriter excluded({"nct_id", "reason"});
  for (const auto& d : r.decisions) {
    if (d.exclusion) excluded.add({d.nct_id, std::string(to_string(*d.exclusion))});
  }
  write_file(cfg.output_dir / artifacts::kExcludedStudies, excluded.text());
  write_file(cfg.output_dir / artifacts::kWarnings, format_warning_log(r.warnings));
  out << format_exclusion_report(r.report);
  if (!r.warnings.empty()) log << r.warnings.size() << " ingest warning(s), see warnings.log\n";
  if (cfg.verbosity > 0) {
    for (const auto& w : r.warnings) log << format_warning(w) << "\n";
  }
}

void run_normalize(const PipelineConfig& cfg, std::ostream& out, std::ostream& log) {
  try {
    cfg.normalizer.validate();
  } catch (const std::invalid_argument& e) {
    fail(kExitInput, e.what());
  }
  TermDictionary dict = load_vocab(cfg);
  auto studies = load_studies(cfg);
  std::vector<WeightedString> ae;
  std::vector<WeightedString> conditions;
  for (const auto& s : studies) {
    for (const auto& row : s.ae_rows) {
      if (!row.reported_term.empty()) ae.push_back({row.reported_term, row.participants_affected});
    }
    for (const auto& c : s.conditions) conditions.push_back({c, 1});
  }
  if (cfg.verbosity > 0) {
    log << "normalizing " << ae.size() << " AE rows and " << conditions.size()
        << " condition entries against " << dict.size() << " terms\n";
  }
  auto ae_norm = normalize_corpus(ae, dict, cfg.normalizer, cfg.threads);
  auto cond_norm = normalize_corpus(conditions, dict, cfg.normalizer, cfg.threads);
  write_file(cfg.output_dir / artifacts::kTermMapping, format_mapping_csv(ae_norm.mappings));
  write_file(cfg.output_dir / artifacts::kConditionMapping, format_mapping_csv(cond_norm.mappings));
  std::string table = format_coverage_table(ae_norm.coverage, "Adverse event term coverage");
  write_file(cfg.output_dir / artifacts::kCoverageText, table);
  write_file(cfg.output_dir / artifacts::kCoverageCsv, format_coverage_csv(ae_norm.coverage));
  out << table;
}

void run_emit(const PipelineConfig& cfg, std::ostream& out, std::ostream& log) {
  if (cfg.dialects.empty()) fail(kExitInput, "no SQL dialect selected");
  TermDictionary dict = load_vocab(cfg);
  auto studies = load_studies(cfg);
  auto ae = load_mappings(cfg, artifacts::kTermMapping);
  auto cond = load_mappings(cfg, artifacts::kConditionMapping);
  auto eth_path = ethnicity_path(cfg);
  require_file(eth_path, "ethnicity map", "ethnicity_map in the config file");
  EthnicityMap eth;
  try {
    eth = EthnicityMap::load(eth_path);
  } catch (const std::exception& e) {
    fail(kExitInput, e.what());
  }
  EmitInputs in{studies, ae, cond, &dict, &eth};
  std::vector<TableData> tables;
  try {
    tables = build_tables(in);
  } catch (const EmitError& e) {
    fail(kExitInput, std::string(e.what()) + " (rerun `normalize`)");
  }
  clear_dir(cfg.output_dir / artifacts::kTablesDir);
  auto written = write_tables(tables, cfg.output_dir / artifacts::kTablesDir);
  for (Dialect d : cfg.dialects) {
    write_file(cfg.output_dir / ddl_file_name(d), generate_ddl(d, ctgdb_schemas()));
  }
  for (const auto& t : written) out << t.table << ": " << t.rows << " rows\n";
  if (cfg.verbosity > 0) log << "wrote " << written.size() << " tables\n";
}

void run_load(const PipelineConfig& cfg, std::ostream& out, std::ostream& log) {
  auto uri = effective_db_uri(cfg);
  if (!uri) {
    fail(kExitInput,
         "no database connection: pass --db-uri sqlite:<path>, set db_uri in the config file, or "
         "export CTGDB_DB_URI");
  }
  ConnectionSpec spec;
  try {
    spec = parse_connection_uri(*uri);
  } catch (const DatabaseError& e) {
    fail(kExitInput, e.what());
  }
  if (cfg.dialects.empty()) fail(kExitInput, "no SQL dialect selected");
  const Dialect dialect = cfg.dialects.front();
  auto ddl_path = cfg.output_dir / ddl_file_name(dialect);
  require_file(ddl_path, "DDL file", "run `emit` first");
  require_file(cfg.output_dir / artifacts::kTablesDir / "clinical_trial.csv", "table CSVs",
               "run `emit` first");

  LoadManifest manifest;
  manifest.run_id = compute_run_id(cfg);
  try {
    Database db = Database::open(spec);
    db.exec(read_file(ddl_path));
    manifest = bulk_load(db, cfg.output_dir / artifacts::kTablesDir, ctgdb_schemas(),
                         manifest.run_id, cfg.to_text());
    if (manifest.success()) {
      for (const auto& o : count_orphans(db, ctgdb_schemas())) {
        if (o.orphans != 0) {
          manifest.failure = LoadFailure{o.table, 0,
                                         std::to_string(o.orphans) + " orphan rows for " + o.constraint};
          break;
        }
      }
    }
  } catch (const DatabaseError& e) {
    manifest.failure = LoadFailure{"", 0, e.what()};
  }
  write_file(cfg.output_dir / artifacts::kLoadManifest, manifest.to_text());
  out << manifest.to_text();
  if (!manifest.success()) {
    const auto& f = *manifest.failure;
    fail(kExitLoad, "load failed" + (f.table.empty() ? std::string() : " in table " + f.table) +
                        (f.row ? " at row " + std::to_string(f.row) : std::string()) + ": " +
                        f.message);
  }
  if (cfg.verbosity > 0) log << "loaded " << manifest.tables.size() << " tables into " << *uri << "\n";
}

void run_screen(const PipelineConfig& cfg, std::ostream& out, std::ostream& log) {
  if (cfg.event_group_files.empty()) fail(kExitInput, "no event group file given (--event-group)");
  std::vector<EventGroup> groups;
  for (const auto& f : cfg.event_group_files) {
    require_file(f, "event group file", "--event-group");
    try {
      auto g = load_event_groups(f);
      groups.insert(groups.end(), g.begin(), g.end());
    } catch (const std::exception& e) {
      fail(kExitInput, e.what());
    }
  }
  TermDictionary dict = load_vocab(cfg);
  auto studies = load_studies(cfg);
  auto mappings = load_mappings(cfg, artifacts::kTermMapping);
  auto index = index_mappings(mappings);
  ScreenConfig sc{cfg.phase_restrict, cfg.serious_only};

  const auto dir = cfg.output_dir / artifacts::kScreeningDir;
  clear_dir(dir);
  for (const auto& g : groups) {
    ScreeningResult r;
    try {
      r = screen(studies, index, dict, g, sc);
    } catch (const UnknownPtCodeError& e) {
      fail(kExitInput, e.what());
    } catch (const EmptyReferenceError& e) {
      fail(kExitAnalytic, "event group '" + g.name + "': " + e.what());
    }
    const std::string base = file_safe(g.name);
    write_file(dir / (base + ".csv"), format_screening_csv(r));
    write_file(dir / (base + ".products.csv"), format_product_csv(r));
    write_file(dir / (base + ".head_to_head.csv"), format_head_to_head_csv(r));
    write_file(dir / (base + ".excluded_arms.csv"), format_exclusion_annex(r));
    std::string summary = format_screening_summary(r);
    write_file(dir / (base + ".summary.txt"), summary);
    out << summary;
    if (cfg.verbosity > 0) log << "screened " << r.arms.size() << " arms for " << g.name << "\n";
  }
}

using Stage = void (*)(const PipelineConfig&, std::ostream&, std::ostream&);

int run_stages(const PipelineConfig& cfg, std::string_view command,
               std::initializer_list<Stage> stages, std::ostream& out, std::ostream& log) {
  int code = kExitOk;
  try {
    require_output(cfg);
    OutputLock lock(cfg.output_dir);
    try {
      for (Stage s : stages) s(cfg, out, log);
    } catch (const StageFailure& f) {
      log << "error: " << f.message << "\n";
      code = f.code;
    } catch (const std::exception& e) {
      log << "error: " << e.what() << "\n";
      code = kExitInput;
    }
    write_run_manifest(cfg, command, code);
  } catch (const StageFailure& f) {
    log << "error: " << f.message << "\n";
    return f.code;
  } catch (const std::exception& e) {
    log << "error: " << e.what() << "\n";
    return kExitInput;
  }
  return code;
}

}  // namespace

int cmd_ingest(const PipelineConfig& cfg, std::ostream& out, std::ostream& log) {
  return run_stages(cfg, "ingest", {run_ingest}, out, log);
}

int cmd_normalize(const PipelineConfig& cfg, std::ostream& out, std::ostream& log) {
  return run_stages(cfg, "normalize", {run_normalize}, out, log);
}

int cmd_emit(const PipelineConfig& cfg, std::ostream& out, std::ostream& log) {
  return run_stages(cfg, "emit", {run_emit}, out, log);
}

int cmd_load(const PipelineConfig& cfg, std::ostream& out, std::ostream& log) {
  return run_stages(cfg, "load", {run_load}, out, log);
}

int cmd_screen(const PipelineConfig& cfg, std::ostream& out, std::ostream& log) {
  return run_stages(cfg, "screen", {run_screen}, out, log);
}

int cmd_all(const PipelineConfig& cfg, std::ostream& out, std::ostream& log) {
  // Check every declared input up front so a bad path fails before any stage runs.
  try {
    cfg.normalizer.validate();
  } catch (const std::invalid_argument& e) {
    log << "error: " << e.what() << "\n";
    return kExitInput;
  }
  if (cfg.input_dir.empty() || !fs::is_directory(cfg.input_dir)) {
    log << "error: input directory not found: " << cfg.input_dir.string() << "\n";
    return kExitInput;
  }
  for (const auto& p : std::vector<fs::path>{cfg.vocabulary_path, ethnicity_path(cfg)}) {
    if (!fs::is_regular_file(p)) {
      log << "error: file not found: " << p.string() << "\n";
      return kExitInput;
    }
  }
  for (const auto& g : cfg.event_group_files) {
    if (!fs::is_regular_file(g)) {
      log << "error: event group file not found: " << g.string() << "\n";
      return kExitInput;
    }
  }
  const bool load = effective_db_uri(cfg).has_value();
  const bool screen_stage = !cfg.event_group_files.empty();
  if (load && screen_stage) {
    return run_stages(cfg, "all", {run_ingest, run_normalize, run_emit, run_load, run_screen}, out, log);
  }
  if (load) return run_stages(cfg, "all", {run_ingest, run_normalize, run_emit, run_load}, out, log);
  if (screen_stage) {
    return run_stages(cfg, "all", {run_ingest, run_normalize, run_emit, run_screen}, out, log);
  }
  return run_stages(cfg, "all", {run_ingest, run_normalize, run_emit}, out, log);
}

}  // namespace ctgdb
