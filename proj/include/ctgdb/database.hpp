#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "ctgdb/schema.hpp"

struct sqlite3;

namespace ctgdb {

class DatabaseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Connection string. Only the embedded store is wired up:
///   sqlite:<path>   or   sqlite::memory:
struct ConnectionSpec {
  std::string scheme;
  std::string target;
};

/// Throws DatabaseError for empty or unsupported URIs.
ConnectionSpec parse_connection_uri(std::string_view uri);

class Database {
 public:
  static Database open(const ConnectionSpec& spec);
  static Database open(std::string_view uri) { return open(parse_connection_uri(uri)); }

  void exec(const std::string& sql);
  std::int64_t query_int(const std::string& sql);
  sqlite3* handle() const { return db_.get(); }

 private:
  explicit Database(sqlite3* db);
  std::unique_ptr<sqlite3, int (*)(sqlite3*)> db_;
};

struct TableLoad {
  std::string table;
  std::size_t rows_written = 0;
  std::size_t rows_loaded = 0;
  std::string checksum;  // sha256 of the CSV file
};

struct LoadFailure {
  std::string table;
  std::size_t row = 0;  // 1-based data row; 0 when not row-specific
  std::string message;
};

struct LoadManifest {
  std::string run_id;
  std::string config_snapshot;
  std::vector<TableLoad> tables;
  std::optional<LoadFailure> failure;

  bool success() const;
  /// One `record=table ...` line per table, then `record=load_summary ...`.
  std::string to_text() const;
};

/// Loads `<csv_dir>/<table>.csv` for each schema in order. Each table loads
/// in one transaction; a failure rolls back that table, skips the rest and
/// is recorded in the manifest. Expects the DDL to be applied already.
LoadManifest bulk_load(Database& db, const std::filesystem::path& csv_dir,
                       std::span<const TableSchema> schemas, std::string run_id = {},
                       std::string config_snapshot = {});

std::int64_t count_rows(Database& db, const std::string& table);

struct OrphanCount {
  std::string table;
  std::string constraint;  // "col -> parent.col"
  std::int64_t orphans = 0;
};

/// Rows whose non-null foreign key has no parent, per foreign key.
std::vector<OrphanCount> count_orphans(Database& db, std::span<const TableSchema> schemas);

}  // namespace ctgdb
