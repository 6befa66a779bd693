#include "ctgdb/kv.hpp"

#include <stdexcept>

namespace ctgdb {

std::string kv_quote(std::string_view value, bool always_quote) {
  bool bare = !always_quote && !value.empty();
  for (char c : value) {
    if (c == ' ' || c == '"' || c == '=' || c == '\\' || static_cast<unsigned char>(c) < 0x20) {
      bare = false;
      break;
    }
  }
  if (bare) return std::string(value);
  std::string out = "\"";
  for (char c : value) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\r': out += "\\r"; break;
      case '\t': out += "\\t"; break;
      default: out.push_back(c);
    }
  }
  out.push_back('"');
  return out;
}

std::map<std::string, std::string> parse_kv_record(std::string_view line) {
  std::map<std::string, std::string> out;
  std::size_t i = 0;
  auto fail = [&](const std::string& why) {
    throw std::invalid_argument(why + " in record '" + std::string(line) + "'");
  };
  while (i < line.size()) {
    while (i < line.size() && line[i] == ' ') ++i;
    if (i >= line.size()) break;
    std::size_t eq = line.find('=', i);
    if (eq == std::string_view::npos || eq == i) fail("expected key=value");
    std::string key(line.substr(i, eq - i));
    if (key.find(' ') != std::string::npos) fail("space in key");
    i = eq + 1;
    std::string value;
    if (i < line.size() && line[i] == '"') {
      ++i;
      bool closed = false;
      while (i < line.size()) {
        char c = line[i++];
        if (c == '"') {
          closed = true;
          break;
        }
        if (c == '\\') {
          if (i >= line.size()) fail("dangling escape");
          char e = line[i++];
          switch (e) {
            case 'n': value.push_back('\n'); break;
            case 'r': value.push_back('\r'); break;
            case 't': value.push_back('\t'); break;
            default: value.push_back(e);
          }
        } else {
          value.push_back(c);
        }
      }
      if (!closed) fail("unterminated quoted value");
    } else {
      std::size_t end = line.find(' ', i);
      if (end == std::string_view::npos) end = line.size();
      value = std::string(line.substr(i, end - i));
      i = end;
    }
    if (!out.emplace(std::move(key), std::move(value)).second) fail("repeated key");
  }
  return out;
}

}  // namespace ctgdb
