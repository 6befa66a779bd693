#pragma once

#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace ctgdb {

enum class ColumnKind { identifier, text, integer, real, boolean, enumeration };

struct ColumnType {
  ColumnKind kind = ColumnKind::text;
  std::vector<std::string> values;  // enumeration only
};

struct Column {
  std::string name;
  ColumnType type;
  bool nullable = false;
};

struct ForeignKey {
  std::vector<std::string> columns;
  std::string table;
  std::vector<std::string> ref_columns;
};

struct TableSchema {
  std::string name;
  std::vector<Column> columns;
  std::vector<std::string> primary_key;
  std::vector<ForeignKey> foreign_keys;

  const Column* column(std::string_view name) const;
  std::size_t column_index(std::string_view name) const;  // throws if absent
  std::vector<std::string> column_names() const;
};

class SchemaError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Checks column/key consistency. Foreign keys must target a table declared
/// earlier in the list (or the table itself), so list order is a valid load
/// order.
void validate_schemas(std::span<const TableSchema> schemas);

/// The emitted table set, parents before children.
const std::vector<TableSchema>& ctgdb_schemas();
const TableSchema& schema_for(std::string_view table);

enum class Dialect { mysql, postgresql };

class UnknownDialectError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

std::string_view to_string(Dialect d);
/// "mysql"/"dialect_a" or "postgresql"/"postgres"/"dialect_b".
Dialect parse_dialect(std::string_view name);

/// Column type spelling for a dialect (see docs/dialects.md).
std::string type_spelling(Dialect d, const ColumnType& type);
std::string quote_identifier(Dialect d, std::string_view name);

/// DROP (children first) then CREATE (parents first) statements. Validates
/// before producing any output.
std::string generate_ddl(Dialect d, std::span<const TableSchema> schemas);

}  // namespace ctgdb
