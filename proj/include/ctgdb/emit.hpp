#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ctgdb/csv.hpp"
#include "ctgdb/normalizer.hpp"
#include "ctgdb/registry.hpp"
#include "ctgdb/schema.hpp"
#include "ctgdb/terminology.hpp"

namespace ctgdb {

enum class EthnicityCategory {
  hispanic_or_latino,
  not_hispanic_or_latino,
  unknown_or_not_reported,
  unharmonized
};

std::string_view to_string(EthnicityCategory c);

struct HarmonizedEthnicity {
  EthnicityCategory category = EthnicityCategory::unharmonized;
  std::string raw;  // the source string, kept for unharmonized values
  friend bool operator==(const HarmonizedEthnicity&, const HarmonizedEthnicity&) = default;
};

/// Editable lookup from raw ethnicity strings to harmonized categories.
/// Keys compare case- and punctuation-insensitively.
class EthnicityMap {
 public:
  EthnicityMap() = default;

  /// TSV with header `raw_value\tharmonized_category`.
  static EthnicityMap load(const std::filesystem::path& path);

  void add(std::string_view raw, EthnicityCategory category);
  HarmonizedEthnicity harmonize(std::string_view raw) const;
  /// Missing stays missing.
  std::optional<HarmonizedEthnicity> harmonize(const std::optional<std::string>& raw) const;

  static std::string key(std::string_view raw);

 private:
  std::map<std::string, EthnicityCategory> entries_;
};

/// In-memory table contents, rows in primary-key order.
struct TableData {
  const TableSchema* schema = nullptr;
  std::vector<Row> rows;
};

class EmitError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct EmitInputs {
  std::span<const StudyRecord> studies;
  std::span<const TermMapping> ae_mappings;
  std::span<const TermMapping> condition_mappings;
  const TermDictionary* dictionary = nullptr;
  const EthnicityMap* ethnicity = nullptr;
};

/// Builds every table in ctgdb_schemas() order. Throws EmitError when an AE
/// term or condition has no mapping.
std::vector<TableData> build_tables(const EmitInputs& in);

/// Sorts rows by the table's primary key (integers numerically).
void sort_by_primary_key(TableData& table);

std::string table_csv(const TableData& table);

struct EmittedTable {
  std::string table;
  std::filesystem::path path;
  std::size_t rows = 0;
};

/// Writes `<dir>/<table>.csv` for every table.
std::vector<EmittedTable> write_tables(const std::vector<TableData>& tables,
                                       const std::filesystem::path& dir);

std::vector<EmittedTable> emit_tables(const EmitInputs& in, const std::filesystem::path& dir);

}  // namespace ctgdb
