#pragma once

#include <cstdint>
#include <span>
#include <string>

namespace ctgdb {

enum class MatchStage { exact, fuzzy, unmapped };

std::string_view to_string(MatchStage stage);
MatchStage parse_match_stage(std::string_view s);

/// Mapping coverage at the unique-string level and weighted by participants
/// affected.
struct CoverageReport {
  std::uint64_t unique_exact = 0;
  std::uint64_t unique_fuzzy = 0;
  std::uint64_t unique_unmapped = 0;
  std::uint64_t weighted_exact = 0;
  std::uint64_t weighted_fuzzy = 0;
  std::uint64_t weighted_unmapped = 0;

  std::uint64_t unique_total() const { return unique_exact + unique_fuzzy + unique_unmapped; }
  std::uint64_t weighted_total() const {
    return weighted_exact + weighted_fuzzy + weighted_unmapped;
  }
  std::uint64_t unique_mapped() const { return unique_exact + unique_fuzzy; }
  std::uint64_t weighted_mapped() const { return weighted_exact + weighted_fuzzy; }

  double unique_pct(MatchStage stage) const;
  double weighted_pct(MatchStage stage) const;
  double unique_mapped_pct() const;
  double weighted_mapped_pct() const;

  friend bool operator==(const CoverageReport&, const CoverageReport&) = default;
};

/// 100 * part / total, or 0 when total is 0.
double percentage(std::uint64_t part, std::uint64_t total);

/// One unique string's category and total participants affected.
struct StageWeight {
  MatchStage stage;
  std::uint64_t weight;
};

CoverageReport coverage_report(std::span<const StageWeight> items);

/// Aligned text table: category rows, a mapped subtotal and a total row.
std::string format_coverage_table(const CoverageReport& report, std::string_view title);

/// Machine-readable CSV:
/// category,unique_count,unique_pct,weighted_count,weighted_pct
std::string format_coverage_csv(const CoverageReport& report);

}  // namespace ctgdb
