#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "ctgdb/text.hpp"

namespace ctgdb {

enum class TermLevel { PT, LLT };

std::string_view to_string(TermLevel level);

struct TermEntry {
  std::string code;  // digits only
  std::string text;
  TermLevel level = TermLevel::PT;
  std::optional<std::string> parent_pt_code;  // required for LLT
  std::optional<std::string> soc_code;
  std::optional<std::string> umls_cui;  // carried through, never interpreted

  friend bool operator==(const TermEntry&, const TermEntry&) = default;
};

/// Orders numeric code strings by value ("9" < "10"), then lexically.
bool code_less(std::string_view a, std::string_view b);

class DictionaryFormatError : public std::runtime_error {
 public:
  DictionaryFormatError(const std::string& what, std::size_t line)
      : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

class DictionaryReferenceError : public std::runtime_error {
 public:
  DictionaryReferenceError(const std::string& what, std::string code)
      : std::runtime_error(what), code_(std::move(code)) {}
  const std::string& code() const { return code_; }

 private:
  std::string code_;
};

class UnknownCodeError : public std::out_of_range {
 public:
  explicit UnknownCodeError(const std::string& code)
      : std::out_of_range("unknown term code '" + code + "'"), code_(code) {}
  const std::string& code() const { return code_; }

 private:
  std::string code_;
};

/// Immutable vocabulary with an exact-text index and bigram posting lists.
/// Entries are held in code order, so entry indices order like codes.
class TermDictionary {
 public:
  TermDictionary() = default;

  /// Validates uniqueness and LLT -> PT links, then builds the indices.
  static TermDictionary from_entries(std::vector<TermEntry> entries);

  std::span<const TermEntry> entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }

  const TermEntry* find(std::string_view code) const;
  std::optional<std::size_t> index_of(std::string_view code) const;

  /// The entry itself for a PT, its parent PT for an LLT.
  const TermEntry& pt_of(std::string_view code) const;

  /// Entry indices whose canonical text equals `canonical`, in code order.
  std::span<const std::uint32_t> exact(std::string_view canonical) const;

  /// Entry indices whose canonical text contains bigram `b`, ascending.
  std::span<const std::uint32_t> postings(Bigram b) const;

  const std::string& canonical_text(std::size_t index) const { return canonical_[index]; }
  const BigramSet& bigrams(std::size_t index) const { return bigrams_[index]; }

 private:
  std::vector<TermEntry> entries_;
  std::vector<std::string> canonical_;
  std::vector<BigramSet> bigrams_;
  std::unordered_map<std::string, std::size_t> by_code_;
  std::unordered_map<std::string, std::vector<std::uint32_t>> exact_index_;
  std::unordered_map<Bigram, std::vector<std::uint32_t>> bigram_index_;
};

inline constexpr std::string_view kVocabularyHeader =
    "code\ttext\tlevel\tparent_pt_code\tsoc_code\tumls_cui";

/// Reads the six-column vocabulary TSV.
TermDictionary load_dictionary(const std::filesystem::path& path);

}  // namespace ctgdb
