#include "ctgdb/csv.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace ctgdb {

CsvWriter::CsvWriter(std::vector<std::string> header) : columns_(header.size()) {
  Row h;
  h.reserve(header.size());
  for (auto& name : header) h.emplace_back(std::move(name));
  append_record(h);
}

void CsvWriter::add(Row row) {
  if (row.size() != columns_) {
    throw std::invalid_argument("csv row has " + std::to_string(row.size()) +
                                " fields, expected " + std::to_string(columns_));
  }
  append_record(row);
  ++rows_;
}

void CsvWriter::append_record(const Row& row) {
  for (std::size_t i = 0; i < row.size(); ++i) {
    if (i) out_.push_back(',');
    if (!row[i]) continue;
    const std::string& v = *row[i];
    if (v.empty()) {
      out_ += "\"\"";
      continue;
    }
    if (v.find_first_of(",\"\r\n") == std::string::npos) {
      out_ += v;
      continue;
    }
    out_.push_back('"');
    for (char c : v) {
      if (c == '"') out_.push_back('"');
      out_.push_back(c);
    }
    out_.push_back('"');
  }
  out_.push_back('\n');
}

CsvDocument parse_csv(std::string_view text) {
  CsvDocument doc;
  std::vector<Row> records;
  std::vector<std::size_t> starts;

  Row record;
  std::string field;
  bool field_quoted = false;
  bool in_quotes = false;
  bool record_open = false;
  std::size_t line = 1;
  std::size_t record_line = 1;

  auto end_field = [&] {
    if (field.empty() && !field_quoted) {
      record.emplace_back(std::nullopt);
    } else {
      record.emplace_back(std::move(field));
    }
    field.clear();
    field_quoted = false;
  };
  auto end_record = [&] {
    end_field();
    records.push_back(std::move(record));
    starts.push_back(record_line);
    record.clear();
    record_open = false;
  };

  for (std::size_t i = 0; i < text.size(); ++i) {
    char c = text[i];
    if (!record_open) {
      record_open = true;
      record_line = line;
    }
    if (in_quotes) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field.push_back('"');
          ++i;
        } else {
          in_quotes = false;
        }
      } else {
        if (c == '\n') ++line;
        field.push_back(c);
      }
      continue;
    }
    switch (c) {
      case '"':
        if (!field.empty()) throw CsvError("unexpected quote inside unquoted field", line);
        in_quotes = true;
        field_quoted = true;
        break;
      case ',':
        end_field();
        break;
      case '\r':
        if (i + 1 < text.size() && text[i + 1] == '\n') break;
        field.push_back(c);
        break;
      case '\n':
        end_record();
        ++line;
        break;
      default:
        if (field_quoted) throw CsvError("characters after closing quote", line);
        field.push_back(c);
    }
  }
  if (in_quotes) throw CsvError("unterminated quoted field", line);
  if (record_open) end_record();

  if (records.empty()) throw CsvError("missing header row", 1);
  for (auto& f : records.front()) doc.header.push_back(f.value_or(""));
  for (std::size_t r = 1; r < records.size(); ++r) {
    if (records[r].size() != doc.header.size()) {
      throw CsvError("row has " + std::to_string(records[r].size()) + " fields, header has " +
                         std::to_string(doc.header.size()),
                     starts[r]);
    }
    doc.rows.push_back(std::move(records[r]));
    doc.line_of.push_back(starts[r]);
  }
  return doc;
}

CsvDocument read_csv_file(const std::filesystem::path& path) {
  return parse_csv(read_file(path));
}

std::vector<TsvLine> read_tsv_file(const std::filesystem::path& path) {
  std::istringstream in(read_file(path));
  std::vector<TsvLine> out;
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    TsvLine entry{number, {}};
    std::size_t start = 0;
    while (true) {
      std::size_t tab = line.find('\t', start);
      entry.fields.push_back(line.substr(start, tab == std::string::npos ? std::string::npos : tab - start));
      if (tab == std::string::npos) break;
      start = tab + 1;
    }
    out.push_back(std::move(entry));
  }
  return out;
}

std::string format_real(double value) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", value);
  return buf;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::filesystem::path& path, std::string_view contents) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

}  // namespace ctgdb
