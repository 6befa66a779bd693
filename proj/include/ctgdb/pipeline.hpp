#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "ctgdb/normalizer.hpp"
#include "ctgdb/schema.hpp"

namespace ctgdb {

/// Process exit codes shared by every subcommand.
enum ExitCode : int { kExitOk = 0, kExitInput = 2, kExitLoad = 3, kExitAnalytic = 4 };

class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct PipelineConfig {
  std::filesystem::path input_dir;
  std::filesystem::path vocabulary_path;
  std::filesystem::path output_dir;
  std::filesystem::path ethnicity_map_path;  // empty: the bundled table
  NormalizerConfig normalizer;
  std::vector<Dialect> dialects{Dialect::mysql, Dialect::postgresql};
  std::optional<std::string> db_uri;
  std::vector<std::filesystem::path> event_group_files;
  bool phase_restrict = true;
  bool serious_only = false;
  int verbosity = 0;
  unsigned threads = 1;

  /// key=value lines, one per setting, in a fixed order. event_group repeats.
  std::string to_text() const;
};

/// Applies `key = value` lines onto `cfg`. Blank lines and `#` comments are
/// skipped; unknown keys and bad values throw ConfigError naming the line.
/// The first event_group line replaces any inherited list.
void apply_config_text(PipelineConfig& cfg, std::string_view text);
PipelineConfig parse_config_text(std::string_view text);
PipelineConfig load_config_file(const std::filesystem::path& path);

/// "mysql", "postgresql" or "both" (aliases accepted by parse_dialect).
std::vector<Dialect> parse_dialect_list(std::string_view s);

std::filesystem::path default_ethnicity_map();

/// cfg.db_uri, else $CTGDB_DB_URI, else nothing.
std::optional<std::string> effective_db_uri(const PipelineConfig& cfg);

/// Deterministic identifier: hash of the path-independent settings and the
/// content of every input file.
std::string compute_run_id(const PipelineConfig& cfg);

/// Artifact names relative to the output directory.
namespace artifacts {
inline constexpr const char* kStudies = "studies.jsonl";
inline constexpr const char* kExclusionReport = "exclusion_report.txt";
inline constexpr const char* kExcludedStudies = "excluded_studies.csv";
inline constexpr const char* kWarnings = "warnings.log";
inline constexpr const char* kTermMapping = "term_mapping.csv";
inline constexpr const char* kConditionMapping = "condition_mapping.csv";
inline constexpr const char* kCoverageText = "coverage.txt";
inline constexpr const char* kCoverageCsv = "coverage.csv";
inline constexpr const char* kTablesDir = "tables";
inline constexpr const char* kLoadManifest = "load_manifest.txt";
inline constexpr const char* kScreeningDir = "screening";
inline constexpr const char* kRunManifest = "manifest.txt";
inline constexpr const char* kLockFile = ".ctgdb.lock";
}  // namespace artifacts

std::string ddl_file_name(Dialect d);

/// Each command validates its own inputs, holds the output-directory lock,
/// writes its artifacts and refreshes manifest.txt. Messages go to `log`.
int cmd_ingest(const PipelineConfig& cfg, std::ostream& out, std::ostream& log);
int cmd_normalize(const PipelineConfig& cfg, std::ostream& out, std::ostream& log);
int cmd_emit(const PipelineConfig& cfg, std::ostream& out, std::ostream& log);
int cmd_load(const PipelineConfig& cfg, std::ostream& out, std::ostream& log);
int cmd_screen(const PipelineConfig& cfg, std::ostream& out, std::ostream& log);
/// ingest, normalize, emit, load (only with a connection), screen (only with
/// event groups). Stops at the first failing stage and returns its code.
int cmd_all(const PipelineConfig& cfg, std::ostream& out, std::ostream& log);

struct ManifestArtifact {
  std::string path;  // relative, '/' separated
  std::string sha256;
  std::uintmax_t bytes = 0;
};

/// Every artifact currently under the output directory, sorted by path.
std::vector<ManifestArtifact> scan_artifacts(const std::filesystem::path& output_dir);

/// Parses manifest.txt back into its artifact records / its config.
std::vector<ManifestArtifact> read_manifest_artifacts(const std::filesystem::path& manifest);
PipelineConfig read_manifest_config(const std::filesystem::path& manifest);

}  // namespace ctgdb
