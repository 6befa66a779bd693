#include "ctgdb/database.hpp"

#include <charconv>

#include <sqlite3.h>

#include "ctgdb/checksum.hpp"
#include "ctgdb/csv.hpp"
#include "ctgdb/kv.hpp"

namespace ctgdb {

ConnectionSpec parse_connection_uri(std::string_view uri) {
  if (uri.empty()) throw DatabaseError("empty database connection string");
  auto colon = uri.find(':');
  if (colon == std::string_view::npos) {
    throw DatabaseError("connection string '" + std::string(uri) + "' has no scheme");
  }
  ConnectionSpec spec{std::string(uri.substr(0, colon)), std::string(uri.substr(colon + 1))};
  if (spec.scheme != "sqlite") {
    throw DatabaseError("unsupported connection scheme '" + spec.scheme +
                        "'; this build loads into sqlite:<path> only (apply schema.<dialect>.sql "
                        "and the CSVs with the server's own bulk loader instead)");
  }
  if (spec.target.rfind("//", 0) == 0) spec.target.erase(0, 2);
  if (spec.target.empty()) throw DatabaseError("sqlite connection string has no path");
  return spec;
}

namespace {

std::string q(std::string_view name) { return quote_identifier(Dialect::postgresql, name); }

class Statement {
 public:
  Statement(sqlite3* db, const std::string& sql) : db_(db) {
    if (sqlite3_prepare_v2(db, sql.c_str(), -1, &stmt_, nullptr) != SQLITE_OK) {
      throw DatabaseError(std::string(sqlite3_errmsg(db)) + " in: " + sql);
    }
  }
  ~Statement() { sqlite3_finalize(stmt_); }
  Statement(const Statement&) = delete;
  Statement& operator=(const Statement&) = delete;

  sqlite3_stmt* get() const { return stmt_; }
  const char* error() const { return sqlite3_errmsg(db_); }

 private:
  sqlite3* db_;
  sqlite3_stmt* stmt_ = nullptr;
};

}  // namespace

Database::Database(sqlite3* db) : db_(db, &sqlite3_close) {}

Database Database::open(const ConnectionSpec& spec) {
  sqlite3* raw = nullptr;
  int rc = sqlite3_open_v2(spec.target.c_str(), &raw, SQLITE_OPEN_READWRITE | SQLITE_OPEN_CREATE,
                           nullptr);
  Database db(raw);
  if (rc != SQLITE_OK) {
    throw DatabaseError("cannot open sqlite database '" + spec.target +
                        "': " + (raw ? sqlite3_errmsg(raw) : "out of memory"));
  }
  db.exec("PRAGMA foreign_keys = ON;");
  return db;
}

void Database::exec(const std::string& sql) {
  char* err = nullptr;
  if (sqlite3_exec(db_.get(), sql.c_str(), nullptr, nullptr, &err) != SQLITE_OK) {
    std::string msg = err ? err : "unknown sqlite error";
    sqlite3_free(err);
    throw DatabaseError(msg);
  }
}

std::int64_t Database::query_int(const std::string& sql) {
  Statement st(db_.get(), sql);
  int rc = sqlite3_step(st.get());
  if (rc != SQLITE_ROW) throw DatabaseError(std::string("query returned no row: ") + sql);
  return sqlite3_column_int64(st.get(), 0);
}

bool LoadManifest::success() const {
  if (failure) return false;
  for (const auto& t : tables) {
    if (t.rows_loaded != t.rows_written) return false;
  }
  return true;
}

std::string LoadManifest::to_text() const {
  std::string out;
  for (const auto& t : tables) {
    out += "record=table name=" + kv_quote(t.table) + " rows_written=" + std::to_string(t.rows_written) +
           " rows_loaded=" + std::to_string(t.rows_loaded) + " sha256=" + kv_quote(t.checksum) + "\n";
  }
  out += "record=load_summary run_id=" + kv_quote(run_id) +
         " status=" + (success() ? "success" : "failed");
  if (failure) {
    out += " failed_table=" + kv_quote(failure->table) + " failed_row=" + std::to_string(failure->row) +
           " message=" + kv_quote(failure->message, true);
  }
  out += "\n";
  return out;
}

namespace {

// Binds one CSV field according to the column's semantic type.
void bind_field(sqlite3_stmt* st, int pos, const Column& col, const Field& f) {
  if (!f) {
    sqlite3_bind_null(st, pos);
    return;
  }
  const std::string& v = *f;
  switch (col.type.kind) {
    case ColumnKind::integer: {
      long long n = 0;
      auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), n);
      if (ec != std::errc() || ptr != v.data() + v.size()) {
        throw DatabaseError("column " + col.name + ": '" + v + "' is not an integer");
      }
      sqlite3_bind_int64(st, pos, n);
      return;
    }
    case ColumnKind::real: {
      double d = 0;
      auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), d);
      if (ec != std::errc() || ptr != v.data() + v.size()) {
        throw DatabaseError("column " + col.name + ": '" + v + "' is not a number");
      }
      sqlite3_bind_double(st, pos, d);
      return;
    }
    case ColumnKind::boolean:
      if (v == "1") {
        sqlite3_bind_int(st, pos, 1);
      } else if (v == "0") {
        sqlite3_bind_int(st, pos, 0);
      } else {
        throw DatabaseError("column " + col.name + ": '" + v + "' is not 1/0");
      }
      return;
    default:
      sqlite3_bind_text(st, pos, v.data(), static_cast<int>(v.size()), SQLITE_TRANSIENT);
  }
}

}  // namespace

LoadManifest bulk_load(Database& db, const std::filesystem::path& csv_dir,
                       std::span<const TableSchema> schemas, std::string run_id,
                       std::string config_snapshot) {
  validate_schemas(schemas);
  LoadManifest manifest;
  manifest.run_id = std::move(run_id);
  manifest.config_snapshot = std::move(config_snapshot);

  for (const auto& schema : schemas) {
    TableLoad load;
    load.table = schema.name;
    auto fail = [&](std::size_t row, std::string message) {
      manifest.tables.push_back(load);
      manifest.failure = LoadFailure{schema.name, row, std::move(message)};
    };

    const auto path = csv_dir / (schema.name + ".csv");
    CsvDocument doc;
    try {
      load.checksum = sha256_file(path);
      doc = read_csv_file(path);
    } catch (const CsvError& e) {
      fail(e.line() > 1 ? e.line() - 1 : 0, e.what());
      break;
    } catch (const std::exception& e) {
      fail(0, e.what());
      break;
    }
    load.rows_written = doc.rows.size();
    if (doc.header != schema.column_names()) {
      fail(0, "CSV header does not match the columns of " + schema.name);
      break;
    }

    try {
      if (count_rows(db, schema.name) != 0) {
        fail(0, "table " + schema.name + " is not empty");
        break;
      }
    } catch (const DatabaseError& e) {
      fail(0, e.what());
      break;
    }

    std::string sql = "INSERT INTO " + q(schema.name) + " (";
    std::string params;
    for (std::size_t i = 0; i < schema.columns.size(); ++i) {
      if (i) {
        sql += ", ";
        params += ", ";
      }
      sql += q(schema.columns[i].name);
      params += "?";
    }
    sql += ") VALUES (" + params + ")";

    db.exec("BEGIN");
    std::optional<LoadFailure> row_failure;
    try {
      // Deferring lets self-referencing rows arrive in key order; violations
      // are located with foreign_key_check before commit.
      db.exec("PRAGMA defer_foreign_keys = ON");
      Statement insert(db.handle(), sql);
      for (std::size_t r = 0; r < doc.rows.size() && !row_failure; ++r) {
        const Row& row = doc.rows[r];
        sqlite3_reset(insert.get());
        sqlite3_clear_bindings(insert.get());
        try {
          for (std::size_t c = 0; c < schema.columns.size(); ++c) {
            bind_field(insert.get(), static_cast<int>(c + 1), schema.columns[c], row[c]);
          }
        } catch (const DatabaseError& e) {
          row_failure = LoadFailure{schema.name, r + 1, e.what()};
          break;
        }
        if (sqlite3_step(insert.get()) != SQLITE_DONE) {
          row_failure = LoadFailure{schema.name, r + 1, insert.error()};
        }
      }
      if (!row_failure) {
        Statement check(db.handle(), "PRAGMA foreign_key_check(" + q(schema.name) + ")");
        if (sqlite3_step(check.get()) == SQLITE_ROW) {
          auto rowid = static_cast<std::size_t>(sqlite3_column_int64(check.get(), 1));
          std::string parent = reinterpret_cast<const char*>(sqlite3_column_text(check.get(), 2));
          row_failure = LoadFailure{schema.name, rowid,
                                    "foreign key violation: no matching row in " + parent};
        }
      }
    } catch (const DatabaseError& e) {
      row_failure = LoadFailure{schema.name, 0, e.what()};
    }
    if (row_failure) {
      db.exec("ROLLBACK");
      manifest.tables.push_back(load);
      manifest.failure = std::move(row_failure);
      break;
    }
    db.exec("COMMIT");
    load.rows_loaded = static_cast<std::size_t>(count_rows(db, schema.name));
    manifest.tables.push_back(load);
  }
  return manifest;
}

std::int64_t count_rows(Database& db, const std::string& table) {
  return db.query_int("SELECT COUNT(*) FROM " + q(table));
}

std::vector<OrphanCount> count_orphans(Database& db, std::span<const TableSchema> schemas) {
  std::vector<OrphanCount> out;
  for (const auto& t : schemas) {
    for (const auto& fk : t.foreign_keys) {
      std::string not_null;
      std::string join;
      std::string label;
      for (std::size_t i = 0; i < fk.columns.size(); ++i) {
        if (i) {
          not_null += " AND ";
          join += " AND ";
          label += ",";
        }
        not_null += "c." + q(fk.columns[i]) + " IS NOT NULL";
        join += "p." + q(fk.ref_columns[i]) + " = c." + q(fk.columns[i]);
        label += fk.columns[i];
      }
      std::string sql = "SELECT COUNT(*) FROM " + q(t.name) + " c WHERE " + not_null +
                        " AND NOT EXISTS (SELECT 1 FROM " + q(fk.table) + " p WHERE " + join + ")";
      std::string target;
      for (std::size_t i = 0; i < fk.ref_columns.size(); ++i) {
        if (i) target += ",";
        target += fk.ref_columns[i];
      }
      out.push_back({t.name, label + " -> " + fk.table + "." + target, db.query_int(sql)});
    }
  }
  return out;
}

}  // namespace ctgdb
