#pragma once

#include <map>
#include <string>
#include <string_view>

namespace ctgdb {

/// Value for a `key=value` record. Bare when it is non-empty and free of
/// spaces, quotes, '=', backslashes and control characters; otherwise
/// double-quoted with \" \\ \n \r \t escapes. `always_quote` forces quoting.
std::string kv_quote(std::string_view value, bool always_quote = false);

/// Parses one `k=v k2="v 2"` record. Throws std::invalid_argument on
/// malformed input or repeated keys.
std::map<std::string, std::string> parse_kv_record(std::string_view line);

}  // namespace ctgdb
