#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace ctgdb {

enum class StudyStatus { recruiting, completed, withdrawn, withheld, other };
enum class Phase {
  early_phase1,
  phase1,
  phase1_2,
  phase2,
  phase2_3,
  phase3,
  phase4,
  not_applicable,
  unknown
};
enum class StudyType { interventional, observational, expanded_access, other };
enum class Sex { all, female, male, unspecified };
enum class ArmType { placebo, active, comparator, sham, no_intervention, other };
enum class Seriousness { serious, other };
enum class InterventionType { drug, biological, device, procedure, behavioral, other };
enum class AgeUnit { years, months, weeks, days };

std::string_view to_string(StudyStatus v);
std::string_view to_string(Phase v);
std::string_view to_string(StudyType v);
std::string_view to_string(Sex v);
std::string_view to_string(ArmType v);
std::string_view to_string(Seriousness v);
std::string_view to_string(InterventionType v);
std::string_view to_string(AgeUnit v);

/// Inverse of to_string for the enums above; throws std::invalid_argument.
template <typename E>
E enum_from_string(std::string_view s);

/// Registry-text mappings ("Phase 1/Phase 2", "Placebo Comparator", ...).
StudyStatus parse_status(std::string_view text);
Phase parse_phase(std::string_view text);
StudyType parse_study_type(std::string_view text);
Sex parse_sex(std::string_view text);
InterventionType parse_intervention_type(std::string_view text);

struct AgeLimit {
  double value = 0.0;
  AgeUnit unit = AgeUnit::years;

  /// Fixed multipliers: year 365.25, month 30.4375, week 7 days.
  double days() const;
  friend bool operator==(const AgeLimit&, const AgeLimit&) = default;
};

/// "18 Years", "6 Months", "N/A" (absent). Throws std::invalid_argument on
/// text that is neither.
std::optional<AgeLimit> parse_age(std::string_view text);

struct EligibilityRecord {
  std::optional<AgeLimit> minimum_age;
  std::optional<AgeLimit> maximum_age;
  Sex sex = Sex::unspecified;
  std::optional<std::string> criteria_text;
  bool age_range_inverted = false;

  bool all_unspecified() const {
    return !criteria_text && !minimum_age && !maximum_age && sex == Sex::unspecified;
  }
  friend bool operator==(const EligibilityRecord&, const EligibilityRecord&) = default;
};

struct SexCounts {
  std::uint64_t female = 0;
  std::uint64_t male = 0;
  friend bool operator==(const SexCounts&, const SexCounts&) = default;
};

struct AgeSummary {
  std::optional<double> mean;
  std::optional<double> sd;
  std::optional<double> median;
  friend bool operator==(const AgeSummary&, const AgeSummary&) = default;
};

struct EthnicityCount {
  std::string raw;
  std::uint64_t count = 0;
  friend bool operator==(const EthnicityCount&, const EthnicityCount&) = default;
};

struct ArmRecord {
  std::string arm_key;   // "<nct_id>_<ordinal, 3 digits>"
  std::string group_id;  // registry group id, may be empty
  std::string label;
  std::optional<std::string> reported_type;
  ArmType arm_type = ArmType::other;
  std::optional<std::uint64_t> participants_started;
  std::optional<SexCounts> sex_counts;
  std::optional<AgeSummary> age_summary;
  std::vector<EthnicityCount> ethnicity_counts;

  friend bool operator==(const ArmRecord&, const ArmRecord&) = default;
};

struct AeCountRow {
  std::string arm_ref;  // group id or label as reported
  std::optional<std::string> arm_key;  // absent when unresolved
  std::string reported_term;
  Seriousness seriousness = Seriousness::other;
  std::uint64_t participants_affected = 0;
  std::optional<std::uint64_t> participants_at_risk;
  std::optional<std::string> organ_system_raw;
  bool counts_inconsistent = false;  // affected > at risk

  bool resolved() const { return arm_key.has_value(); }
  friend bool operator==(const AeCountRow&, const AeCountRow&) = default;
};

struct InterventionRecord {
  InterventionType intervention_type = InterventionType::other;
  std::string name;
  std::vector<std::string> arm_refs;
  friend bool operator==(const InterventionRecord&, const InterventionRecord&) = default;
};

struct StudyRecord {
  std::string nct_id;
  std::string brief_title;
  std::optional<std::string> official_title;
  std::optional<std::string> summary;
  std::string registry_url;
  StudyStatus status = StudyStatus::other;
  Phase phase = Phase::unknown;
  StudyType study_type = StudyType::other;
  std::vector<std::string> conditions;
  std::vector<InterventionRecord> interventions;
  EligibilityRecord eligibility;
  std::optional<bool> healthy_volunteers;
  std::vector<ArmRecord> arms;
  std::vector<AeCountRow> ae_rows;
  std::vector<std::string> countries;

  const ArmRecord* find_arm(std::string_view arm_key) const;
  friend bool operator==(const StudyRecord&, const StudyRecord&) = default;
};

/// One explicit-handling note about a source file.
struct IngestWarning {
  std::string file;
  std::optional<std::string> nct_id;
  std::string code;
  std::string message;
  friend bool operator==(const IngestWarning&, const IngestWarning&) = default;
};

/// `file=... nct_id=... code=... message="..."` (nct_id omitted when absent).
std::string format_warning(const IngestWarning& w);
std::string format_warning_log(const std::vector<IngestWarning>& warnings);

struct ParseFailure {
  enum class Kind { malformed_xml, missing_nct_id };
  Kind kind;
  std::string message;
};
std::string_view to_string(ParseFailure::Kind kind);

struct ParsedStudy {
  StudyRecord study;
  std::vector<IngestWarning> warnings;
};

/// Streaming parse of one registry document. `source_name` labels warnings.
std::variant<ParsedStudy, ParseFailure> parse_study(std::string_view xml,
                                                    std::string_view source_name = "");

ArmType classify_arm(std::string_view label, std::optional<std::string_view> reported_type);

enum class ExclusionReason { results_withheld, no_eligibility, no_conditions };
std::string_view to_string(ExclusionReason r);

/// std::nullopt means included. Rules fire in declaration order.
std::optional<ExclusionReason> filter_study(const StudyRecord& study);

struct ExclusionReport {
  std::uint64_t total_seen = 0;
  std::uint64_t excluded_results_withheld = 0;
  std::uint64_t excluded_no_eligibility = 0;
  std::uint64_t excluded_no_conditions = 0;
  std::uint64_t included = 0;

  std::uint64_t excluded_total() const {
    return excluded_results_withheld + excluded_no_eligibility + excluded_no_conditions;
  }
  void record(std::optional<ExclusionReason> decision);
  friend bool operator==(const ExclusionReport&, const ExclusionReport&) = default;
};

std::string format_exclusion_report(const ExclusionReport& r);
ExclusionReport parse_exclusion_report(std::string_view text);

struct IngestConfig {
  unsigned threads = 1;
};

struct StudyDecision {
  std::string nct_id;
  std::optional<ExclusionReason> exclusion;
};

struct IngestResult {
  std::vector<StudyRecord> studies;  // included only, sorted by nct_id
  std::vector<StudyDecision> decisions;  // every counted study, sorted by nct_id
  ExclusionReport report;
  std::vector<IngestWarning> warnings;  // sorted by file, then emission order
};

class IngestError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Parses every *.xml file under `dir` (recursively). Throws IngestError
/// only when the directory itself cannot be read.
IngestResult ingest_archive(const std::filesystem::path& dir, const IngestConfig& cfg = {});

/// Same, over explicit files; `labels` name them in warnings.
IngestResult ingest_files(const std::vector<std::filesystem::path>& files,
                          const std::vector<std::string>& labels, const IngestConfig& cfg = {});

}  // namespace ctgdb
