#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "ctgdb/normalizer.hpp"
#include "ctgdb/registry.hpp"
#include "ctgdb/terminology.hpp"

namespace ctgdb {

/// A named set of PT codes aggregated into one event of interest.
struct EventGroup {
  std::string name;
  std::set<std::string> pt_codes;
};

class UnknownPtCodeError : public std::invalid_argument {
 public:
  UnknownPtCodeError(const std::string& group, const std::string& code)
      : std::invalid_argument("event group '" + group + "' lists '" + code +
                              "', which is not a PT in the vocabulary"),
        code_(code) {}
  const std::string& code() const { return code_; }

 private:
  std::string code_;
};

/// TSV `group_name\tpt_code`, one row per member; groups in name order.
std::vector<EventGroup> load_event_groups(const std::filesystem::path& path);

/// Throws UnknownPtCodeError for empty groups or codes that are not PTs.
void validate_event_group(const EventGroup& group, const TermDictionary& dict);

using MappingIndex = std::unordered_map<std::string, const TermMapping*>;
MappingIndex index_mappings(std::span<const TermMapping> mappings);

struct GroupCount {
  std::uint64_t n_ae = 0;    // summed participants_affected
  std::size_t rows = 0;      // contributing AE rows
};

/// Per arm_key: sum of participants_affected over resolved rows whose term
/// maps to a PT in the group. Unmapped rows never contribute.
std::map<std::string, GroupCount> group_events(std::span<const StudyRecord> studies,
                                               const MappingIndex& mappings,
                                               const EventGroup& group, const TermDictionary& dict,
                                               bool serious_only = false);

class UndefinedDenominatorError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// n_ae / n_started. Throws UndefinedDenominatorError for absent or zero
/// n_started.
double arm_proportion(std::uint64_t n_ae, std::optional<std::uint64_t> n_started);

/// Linear interpolation between order statistics at rank h = (n - 1) p.
/// `sorted` must be ascending and non-empty.
double quantile_linear(std::span<const double> sorted, double p);

struct ArmEventStat {
  std::string arm_key;
  std::string nct_id;
  std::string product_label;
  Phase phase = Phase::unknown;
  ArmType arm_type = ArmType::other;
  bool is_placebo = false;
  std::uint64_t n_ae = 0;
  std::uint64_t n_started = 0;
  double p_arm = 0.0;
  bool capped = false;  // summed count exceeded n_started and was capped
};

class EmptyReferenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct PlaceboReference {
  std::vector<ArmEventStat> pooled_arms;
  double q75 = 0.0;
  double max_p = 0.0;
  std::uint64_t pooled_n_ae = 0;
  std::uint64_t pooled_n_started = 0;
};

/// Pools uncapped placebo arms; everything else is ignored. Throws
/// EmptyReferenceError when none remain.
PlaceboReference placebo_reference(std::span<const ArmEventStat> arms);

struct OddsRatio {
  double value = 0.0;
  bool corrected = false;  // Haldane-Anscombe +0.5 applied
};

class InvalidCountsError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// [a (b_n - b)] / [(a_n - a) b]; when any cell is zero every cell gets +0.5.
OddsRatio odds_ratio(std::uint64_t a_events, std::uint64_t a_n, std::uint64_t b_events,
                     std::uint64_t b_n);

struct ScreenConfig {
  bool phase_restrict = true;  // product aggregates from phase 3/4 only
  bool serious_only = false;
};

struct ArmScreen {
  ArmEventStat stat;
  bool exceeds_q75 = false;
  bool exceeds_max = false;
  OddsRatio or_vs_placebo;
};

struct ProductAggregate {
  std::string product_label;
  std::size_t arms = 0;
  std::uint64_t n_ae = 0;
  std::uint64_t n_started = 0;
  double p = 0.0;
  OddsRatio or_vs_placebo;
};

struct HeadToHead {
  std::string product_a;
  std::string product_b;
  OddsRatio odds;  // odds of a relative to b
};

struct ExcludedArm {
  std::string nct_id;
  std::string arm_key;
  std::string reason;
};

struct ScreeningResult {
  std::string group_name;
  std::vector<ArmScreen> arms;  // ordered by (product_label, nct_id, arm_key)
  PlaceboReference reference;
  std::vector<ProductAggregate> products;  // by product_label
  std::vector<HeadToHead> head_to_head;
  std::vector<ExcludedArm> excluded;
};

/// Label used for pooling: "Placebo" for placebo arms, otherwise the first
/// drug/biological intervention attached to the arm (by label), else the
/// first attached intervention of any type, else the arm label.
std::string product_label(const StudyRecord& study, const ArmRecord& arm);

/// Arms whose counts aggregate into a product (active, comparator, other).
bool is_product_arm(ArmType type);

/// Throws EmptyReferenceError when no placebo arm has a usable denominator.
ScreeningResult screen(std::span<const StudyRecord> studies, const MappingIndex& mappings,
                       const TermDictionary& dict, const EventGroup& group,
                       const ScreenConfig& cfg);

inline constexpr std::string_view kScreeningCsvHeader =
    "product,phase,nct_id,arm_key,n_ae,n_started,p_arm,is_placebo,q75,max_placebo,exceeds_q75,"
    "exceeds_max,or_vs_placebo,or_corrected";

/// One row per arm, reals with 6 decimals.
std::string format_screening_csv(const ScreeningResult& r);
std::string format_product_csv(const ScreeningResult& r);
std::string format_head_to_head_csv(const ScreeningResult& r);
std::string format_exclusion_annex(const ScreeningResult& r);
std::string format_screening_summary(const ScreeningResult& r);

}  // namespace ctgdb
