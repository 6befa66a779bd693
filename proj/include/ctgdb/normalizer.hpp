#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ctgdb/coverage.hpp"
#include "ctgdb/terminology.hpp"

namespace ctgdb {

struct NormalizerConfig {
  double fuzzy_threshold = 0.85;
  std::size_t min_candidate_bigram_overlap = 2;
  bool strip_grading = true;
  bool enable_fuzzy = true;

  /// Throws std::invalid_argument unless 0 < fuzzy_threshold <= 1.
  void validate() const;
};

/// Provenance of one reported string's alignment to the vocabulary.
struct TermMapping {
  std::string reported_string;
  std::string canonical_string;
  std::optional<std::string> matched_code;
  std::optional<std::string> matched_pt_code;
  MatchStage stage = MatchStage::unmapped;
  double similarity = 0.0;
  std::optional<std::string> stripped_suffix;

  friend bool operator==(const TermMapping&, const TermMapping&) = default;
};

/// Smallest bigram overlap any entry scoring >= threshold against a query
/// with `query_bigrams` bigrams can have.
std::size_t min_overlap_for_threshold(std::size_t query_bigrams, double threshold);

/// Exact lookup on canonical text, then (if enabled) bigram Dice scoring.
/// Ties: higher score, PT before LLT, lowest code.
TermMapping match_term(std::string_view raw, const TermDictionary& dict,
                       const NormalizerConfig& cfg);

struct WeightedString {
  std::string raw;
  std::uint64_t participants_affected = 0;
};

struct NormalizedCorpus {
  std::vector<TermMapping> mappings;  // one per unique raw string, sorted by raw
  std::vector<std::uint64_t> weights;  // parallel to mappings
  CoverageReport coverage;
};

/// Maps each unique raw string once; weights are summed per raw string.
NormalizedCorpus normalize_corpus(std::span<const WeightedString> strings,
                                  const TermDictionary& dict, const NormalizerConfig& cfg,
                                  unsigned threads = 1);

/// Mapping CSV round trip.
inline constexpr std::string_view kMappingCsvHeader =
    "reported_string,canonical_string,matched_code,matched_pt_code,stage,similarity,stripped_suffix";
std::string format_mapping_csv(std::span<const TermMapping> mappings);
std::vector<TermMapping> parse_mapping_csv(std::string_view text);

}  // namespace ctgdb
