#include "ctgdb/text.hpp"

#include <algorithm>
#include <array>
#include <stdexcept>

#include <unicode/normalizer2.h>
#include <unicode/uchar.h>
#include <unicode/unistr.h>

namespace ctgdb {
namespace {

const icu::Normalizer2& nfkc_casefold() {
  static const icu::Normalizer2* instance = [] {
    UErrorCode status = U_ZERO_ERROR;
    const icu::Normalizer2* n = icu::Normalizer2::getNFKCCasefoldInstance(status);
    if (U_FAILURE(status) || n == nullptr) {
      throw std::runtime_error("ICU NFKC_Casefold normalizer unavailable");
    }
    return n;
  }();
  return *instance;
}

bool folds_to_space(UChar32 c) {
  switch (u_charType(c)) {
    case U_DASH_PUNCTUATION:
    case U_START_PUNCTUATION:
    case U_END_PUNCTUATION:
    case U_CONNECTOR_PUNCTUATION:
    case U_OTHER_PUNCTUATION:
    case U_INITIAL_PUNCTUATION:
    case U_FINAL_PUNCTUATION:
    case U_MATH_SYMBOL:
    case U_CURRENCY_SYMBOL:
    case U_MODIFIER_SYMBOL:
    case U_OTHER_SYMBOL:
    case U_CONTROL_CHAR:
    case U_FORMAT_CHAR:
    case U_SPACE_SEPARATOR:
    case U_LINE_SEPARATOR:
    case U_PARAGRAPH_SEPARATOR:
    case U_UNASSIGNED:
    case U_SURROGATE:
    case U_PRIVATE_USE_CHAR:
      return true;
    default:
      return u_isUWhiteSpace(c);
  }
}

std::vector<std::string> split_tokens(const std::string& s) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= s.size()) {
    std::size_t end = s.find(' ', start);
    if (end == std::string::npos) end = s.size();
    if (end > start) out.push_back(s.substr(start, end - start));
    start = end + 1;
  }
  return out;
}

bool is_roman_grade(const std::string& t) {
  static constexpr std::array<std::string_view, 5> kRoman{"i", "ii", "iii", "iv", "v"};
  return std::find(kRoman.begin(), kRoman.end(), t) != kRoman.end();
}

bool is_digit_grade(const std::string& t) {
  return t.size() == 1 && t[0] >= '1' && t[0] <= '5';
}

// Number of trailing tokens that form one grading annotation, or 0.
std::size_t grading_tail(const std::vector<std::string>& tokens) {
  if (tokens.empty()) return 0;
  const std::string& last = tokens.back();
  if (last.size() == 2 && last[0] == 'g' && is_digit_grade(last.substr(1))) return 1;
  if (tokens.size() >= 2 && tokens[tokens.size() - 2] == "grade" &&
      (is_digit_grade(last) || is_roman_grade(last))) {
    return 2;
  }
  return 0;
}

std::string join(const std::vector<std::string>& tokens, std::size_t begin, std::size_t end) {
  std::string out;
  for (std::size_t i = begin; i < end; ++i) {
    if (!out.empty()) out.push_back(' ');
    out += tokens[i];
  }
  return out;
}

// NFKC_Casefold followed by punctuation folding and whitespace collapse.
std::string fold_once(std::string_view raw) {
  UErrorCode status = U_ZERO_ERROR;
  icu::UnicodeString src = icu::UnicodeString::fromUTF8(
      icu::StringPiece(raw.data(), static_cast<int32_t>(raw.size())));
  icu::UnicodeString folded = nfkc_casefold().normalize(src, status);
  if (U_FAILURE(status)) throw std::runtime_error("unicode normalization failed");

  std::u32string out;
  out.reserve(static_cast<std::size_t>(folded.length()));
  bool pending_space = false;
  for (int32_t i = 0; i < folded.length();) {
    UChar32 c = folded.char32At(i);
    i += U16_LENGTH(c);
    if (folds_to_space(c)) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) {
      out.push_back(U' ');
      pending_space = false;
    }
    out.push_back(static_cast<char32_t>(c));
  }
  return u32_to_utf8(out);
}

}  // namespace

CanonicalText canonicalize(std::string_view raw, bool strip_grading) {
  // Removing characters can expose a new composition; iterate to a fixed point.
  std::string text = fold_once(raw);
  for (int i = 0; i < 4; ++i) {
    std::string again = fold_once(text);
    if (again == text) break;
    text = std::move(again);
  }

  CanonicalText result;
  if (!strip_grading) {
    result.text = std::move(text);
    return result;
  }

  std::vector<std::string> tokens = split_tokens(text);
  std::size_t keep = tokens.size();
  std::vector<std::string> removed;
  while (true) {
    std::vector<std::string> head(tokens.begin(), tokens.begin() + static_cast<std::ptrdiff_t>(keep));
    std::size_t tail = grading_tail(head);
    if (tail == 0 || tail >= keep) break;
    removed.insert(removed.begin(), head.end() - static_cast<std::ptrdiff_t>(tail), head.end());
    keep -= tail;
  }
  result.text = join(tokens, 0, keep);
  if (!removed.empty()) result.stripped_suffix = join(removed, 0, removed.size());
  return result;
}

BigramSet bigram_set(std::string_view canonical) {
  std::u32string cps = utf8_to_u32(canonical);
  BigramSet out;
  auto pack = [](char32_t a, char32_t b) {
    return (static_cast<Bigram>(a) << 32) | static_cast<Bigram>(b);
  };
  if (cps.size() == 1) {
    out.push_back(pack(cps[0], kBigramPad));
    return out;
  }
  for (std::size_t i = 0; i + 1 < cps.size(); ++i) out.push_back(pack(cps[i], cps[i + 1]));
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::string bigram_to_string(Bigram b) {
  std::u32string s{static_cast<char32_t>(b >> 32), static_cast<char32_t>(b & 0xffffffffu)};
  return u32_to_utf8(s);
}

double dice_similarity(const BigramSet& a, const BigramSet& b) {
  std::size_t common = 0;
  auto ia = a.begin();
  auto ib = b.begin();
  while (ia != a.end() && ib != b.end()) {
    if (*ia < *ib) {
      ++ia;
    } else if (*ib < *ia) {
      ++ib;
    } else {
      ++common;
      ++ia;
      ++ib;
    }
  }
  return dice_from_counts(common, a.size(), b.size());
}

std::u32string utf8_to_u32(std::string_view s) {
  std::u32string out;
  out.reserve(s.size());
  std::size_t i = 0;
  const auto n = s.size();
  auto byte = [&](std::size_t k) { return static_cast<unsigned char>(s[k]); };
  while (i < n) {
    unsigned char c = byte(i);
    char32_t cp = 0xFFFD;
    std::size_t len = 1;
    if (c < 0x80) {
      cp = c;
    } else if ((c >> 5) == 0x6 && i + 1 < n && (byte(i + 1) & 0xC0) == 0x80) {
      cp = ((c & 0x1Fu) << 6) | (byte(i + 1) & 0x3Fu);
      len = 2;
      if (cp < 0x80) cp = 0xFFFD;
    } else if ((c >> 4) == 0xE && i + 2 < n && (byte(i + 1) & 0xC0) == 0x80 &&
               (byte(i + 2) & 0xC0) == 0x80) {
      cp = ((c & 0x0Fu) << 12) | ((byte(i + 1) & 0x3Fu) << 6) | (byte(i + 2) & 0x3Fu);
      len = 3;
      if (cp < 0x800 || (cp >= 0xD800 && cp <= 0xDFFF)) cp = 0xFFFD;
    } else if ((c >> 3) == 0x1E && i + 3 < n && (byte(i + 1) & 0xC0) == 0x80 &&
               (byte(i + 2) & 0xC0) == 0x80 && (byte(i + 3) & 0xC0) == 0x80) {
      cp = ((c & 0x07u) << 18) | ((byte(i + 1) & 0x3Fu) << 12) | ((byte(i + 2) & 0x3Fu) << 6) |
           (byte(i + 3) & 0x3Fu);
      len = 4;
      if (cp < 0x10000 || cp > 0x10FFFF) cp = 0xFFFD;
    }
    out.push_back(cp);
    i += len;
  }
  return out;
}

std::string u32_to_utf8(std::u32string_view s) {
  std::string out;
  out.reserve(s.size());
  for (char32_t cp : s) {
    if (cp < 0x80) {
      out.push_back(static_cast<char>(cp));
    } else if (cp < 0x800) {
      out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
      out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else if (cp < 0x10000) {
      out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
      out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
      out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else {
      out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
      out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
      out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
      out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    }
  }
  return out;
}

}  // namespace ctgdb
