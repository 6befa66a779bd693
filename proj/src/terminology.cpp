#include "ctgdb/terminology.hpp"

#include <algorithm>

#include "ctgdb/csv.hpp"

namespace ctgdb {

std::string_view to_string(TermLevel level) {
  return level == TermLevel::PT ? "PT" : "LLT";
}

bool code_less(std::string_view a, std::string_view b) {
  auto strip = [](std::string_view s) {
    std::size_t i = 0;
    while (i + 1 < s.size() && s[i] == '0') ++i;
    return s.substr(i);
  };
  std::string_view sa = strip(a);
  std::string_view sb = strip(b);
  if (sa.size() != sb.size()) return sa.size() < sb.size();
  if (sa != sb) return sa < sb;
  return a < b;
}

TermDictionary TermDictionary::from_entries(std::vector<TermEntry> entries) {
  TermDictionary d;
  std::sort(entries.begin(), entries.end(),
            [](const TermEntry& a, const TermEntry& b) { return code_less(a.code, b.code); });
  d.entries_ = std::move(entries);

  for (std::size_t i = 0; i < d.entries_.size(); ++i) {
    const auto& e = d.entries_[i];
    if (!d.by_code_.emplace(e.code, i).second) {
      throw DictionaryReferenceError("duplicate term code '" + e.code + "'", e.code);
    }
  }
  for (const auto& e : d.entries_) {
    if (e.level != TermLevel::LLT) continue;
    if (!e.parent_pt_code) {
      throw DictionaryReferenceError("LLT '" + e.code + "' has no parent PT code", e.code);
    }
    auto it = d.by_code_.find(*e.parent_pt_code);
    if (it == d.by_code_.end()) {
      throw DictionaryReferenceError(
          "LLT '" + e.code + "' references missing parent PT '" + *e.parent_pt_code + "'",
          *e.parent_pt_code);
    }
    if (d.entries_[it->second].level != TermLevel::PT) {
      throw DictionaryReferenceError(
          "LLT '" + e.code + "' parent '" + *e.parent_pt_code + "' is not a PT", *e.parent_pt_code);
    }
  }

  d.canonical_.reserve(d.entries_.size());
  d.bigrams_.reserve(d.entries_.size());
  for (std::size_t i = 0; i < d.entries_.size(); ++i) {
    std::string canonical = canonicalize(d.entries_[i].text).text;
    d.bigrams_.push_back(bigram_set(canonical));
    for (Bigram b : d.bigrams_.back()) {
      d.bigram_index_[b].push_back(static_cast<std::uint32_t>(i));
    }
    d.exact_index_[canonical].push_back(static_cast<std::uint32_t>(i));
    d.canonical_.push_back(std::move(canonical));
  }
  return d;
}

const TermEntry* TermDictionary::find(std::string_view code) const {
  auto it = by_code_.find(std::string(code));
  return it == by_code_.end() ? nullptr : &entries_[it->second];
}

std::optional<std::size_t> TermDictionary::index_of(std::string_view code) const {
  auto it = by_code_.find(std::string(code));
  if (it == by_code_.end()) return std::nullopt;
  return it->second;
}

const TermEntry& TermDictionary::pt_of(std::string_view code) const {
  const TermEntry* e = find(code);
  if (e == nullptr) throw UnknownCodeError(std::string(code));
  if (e->level == TermLevel::PT) return *e;
  return *find(*e->parent_pt_code);
}

std::span<const std::uint32_t> TermDictionary::exact(std::string_view canonical) const {
  auto it = exact_index_.find(std::string(canonical));
  if (it == exact_index_.end()) return {};
  return it->second;
}

std::span<const std::uint32_t> TermDictionary::postings(Bigram b) const {
  auto it = bigram_index_.find(b);
  if (it == bigram_index_.end()) return {};
  return it->second;
}

TermDictionary load_dictionary(const std::filesystem::path& path) {
  std::vector<TsvLine> lines = read_tsv_file(path);
  if (lines.empty()) throw DictionaryFormatError("missing header row", 1);

  std::string header;
  for (std::size_t i = 0; i < lines.front().fields.size(); ++i) {
    if (i) header.push_back('\t');
    header += lines.front().fields[i];
  }
  if (header != kVocabularyHeader) {
    throw DictionaryFormatError("unexpected header '" + header + "'", lines.front().line);
  }

  std::vector<TermEntry> entries;
  entries.reserve(lines.size() - 1);
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto& [line, f] = lines[i];
    if (f.size() != 6) {
      throw DictionaryFormatError("expected 6 columns, found " + std::to_string(f.size()), line);
    }
    TermEntry e;
    e.code = f[0];
    if (e.code.empty() ||
        !std::all_of(e.code.begin(), e.code.end(), [](char c) { return c >= '0' && c <= '9'; })) {
      throw DictionaryFormatError("code must be a non-empty digit string", line);
    }
    e.text = f[1];
    if (e.text.empty()) throw DictionaryFormatError("empty term text", line);
    if (f[2] == "PT" || f[2] == "pt") {
      e.level = TermLevel::PT;
    } else if (f[2] == "LLT" || f[2] == "llt") {
      e.level = TermLevel::LLT;
    } else {
      throw DictionaryFormatError("level must be PT or LLT, found '" + f[2] + "'", line);
    }
    auto opt = [](const std::string& s) -> std::optional<std::string> {
      if (s.empty()) return std::nullopt;
      return s;
    };
    e.parent_pt_code = opt(f[3]);
    e.soc_code = opt(f[4]);
    e.umls_cui = opt(f[5]);
    if (e.level == TermLevel::LLT && !e.parent_pt_code) {
      throw DictionaryFormatError("LLT row without parent_pt_code", line);
    }
    if (e.level == TermLevel::PT && e.parent_pt_code) {
      throw DictionaryFormatError("PT row must not carry parent_pt_code", line);
    }
    entries.push_back(std::move(e));
  }
  return TermDictionary::from_entries(std::move(entries));
}

}  // namespace ctgdb
