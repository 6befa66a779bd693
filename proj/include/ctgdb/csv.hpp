#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace ctgdb {

/// One CSV field; std::nullopt is written as an empty field.
using Field = std::optional<std::string>;
using Row = std::vector<Field>;

class CsvError : public std::runtime_error {
 public:
  CsvError(const std::string& what, std::size_t line) : std::runtime_error(what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

/// RFC-4180 writer with "\n" record terminators. Fields containing a comma,
/// quote, CR or LF are quoted; a present empty string is written as "" so it
/// stays distinct from an absent value.
class CsvWriter {
 public:
  explicit CsvWriter(std::vector<std::string> header);

  void add(Row row);
  std::size_t rows() const { return rows_; }
  const std::string& text() const { return out_; }

 private:
  void append_record(const Row& row);

  std::size_t columns_;
  std::size_t rows_ = 0;
  std::string out_;
};

/// Parsed CSV document: header plus data rows; empty fields read back as
/// std::nullopt. `line_of[i]` is the physical line on which row i starts.
struct CsvDocument {
  std::vector<std::string> header;
  std::vector<Row> rows;
  std::vector<std::size_t> line_of;
};

CsvDocument parse_csv(std::string_view text);
CsvDocument read_csv_file(const std::filesystem::path& path);

/// Tab-separated rows, no quoting; blank lines skipped. Each entry carries
/// its 1-based line number.
struct TsvLine {
  std::size_t line;
  std::vector<std::string> fields;
};
std::vector<TsvLine> read_tsv_file(const std::filesystem::path& path);

std::string format_real(double value);  // fixed, 6 decimals

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view contents);

}  // namespace ctgdb
