#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace ctgdb {

/// Result of canonicalizing a reported term.
struct CanonicalText {
  std::string text;
  /// Trailing grading annotation removed from the text ("g1", "grade iii").
  std::optional<std::string> stripped_suffix;

  friend bool operator==(const CanonicalText&, const CanonicalText&) = default;
};

/// Lowercase (Unicode case folding), NFKC-normalize, turn punctuation,
/// symbols and control characters into spaces and collapse whitespace.
/// With `strip_grading`, trailing tokens such as "g2", "grade 3" or
/// "grade iv" are removed as long as something remains.
///
/// canonicalize(canonicalize(x).text) == canonicalize(x).text for every x.
CanonicalText canonicalize(std::string_view raw, bool strip_grading = true);

/// A character bigram: two Unicode code points packed high/low.
using Bigram = std::uint64_t;

/// Sorted, duplicate-free set of bigrams.
using BigramSet = std::vector<Bigram>;

/// Padding code point used for single-character strings.
inline constexpr char32_t kBigramPad = U'_';

/// Adjacent code-point pairs of `canonical` (spaces included). A single
/// character yields {c, '_'}; the empty string yields {}.
BigramSet bigram_set(std::string_view canonical);

/// UTF-8 rendering of one bigram, e.g. "na".
std::string bigram_to_string(Bigram b);

/// Dice coefficient for two set sizes and their intersection size.
inline double dice_from_counts(std::size_t common, std::size_t size_a, std::size_t size_b) {
  if (size_a + size_b == 0) return 0.0;
  return 2.0 * static_cast<double>(common) / static_cast<double>(size_a + size_b);
}

/// 2|a ∩ b| / (|a| + |b|), 0 when both are empty.
double dice_similarity(const BigramSet& a, const BigramSet& b);

/// Decodes UTF-8 into code points; invalid sequences become U+FFFD.
std::u32string utf8_to_u32(std::string_view s);
std::string u32_to_utf8(std::u32string_view s);

}  // namespace ctgdb
