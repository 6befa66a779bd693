// Independent reference implementations and corpus generators shared by the
// unit tests and the acceptance runner. Nothing here calls the library's
// scoring, statistics or formatting code.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#ifndef CTGDB_SOURCE_DIR
#define CTGDB_SOURCE_DIR "."
#endif

namespace oracle {

inline std::filesystem::path source_dir() { return CTGDB_SOURCE_DIR; }

// Fresh empty directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
  auto p = std::filesystem::temp_directory_path() /
           ("ctgdb-test-" + name + "-" + std::to_string(::getpid()));
  std::filesystem::remove_all(p);
  std::filesystem::create_directories(p);
  return p;
}

inline std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

inline void spit(const std::filesystem::path& p, const std::string& s) {
  std::filesystem::create_directories(p.parent_path());
  std::ofstream(p, std::ios::binary) << s;
}

// ---- fuzzy matching -------------------------------------------------------

// Code points of a UTF-8 string, decoded by hand.
inline std::vector<std::uint32_t> code_points(const std::string& s) {
  std::vector<std::uint32_t> out;
  for (std::size_t i = 0; i < s.size();) {
    auto c = static_cast<unsigned char>(s[i]);
    int len = c < 0x80 ? 1 : (c >> 5) == 6 ? 2 : (c >> 4) == 14 ? 3 : 4;
    std::uint32_t cp = len == 1 ? c : len == 2 ? (c & 0x1f) : len == 3 ? (c & 0x0f) : (c & 0x07);
    for (int k = 1; k < len && i + k < s.size(); ++k) cp = (cp << 6) | (s[i + k] & 0x3f);
    out.push_back(cp);
    i += len;
  }
  return out;
}

// Bigrams as "cp1,cp2" strings.
inline std::set<std::string> bigrams(const std::string& canonical) {
  auto cps = code_points(canonical);
  std::set<std::string> out;
  if (cps.size() == 1) {
    out.insert(std::to_string(cps[0]) + "," + std::to_string('_'));
    return out;
  }
  for (std::size_t i = 0; i + 1 < cps.size(); ++i) {
    out.insert(std::to_string(cps[i]) + "," + std::to_string(cps[i + 1]));
  }
  return out;
}

inline double dice(const std::set<std::string>& a, const std::set<std::string>& b) {
  if (a.empty() && b.empty()) return 0.0;
  std::vector<std::string> common;
  std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(common));
  return 2.0 * static_cast<double>(common.size()) / static_cast<double>(a.size() + b.size());
}

// Numeric order on digit strings of any length.
inline bool code_before(const std::string& a, const std::string& b) {
  auto strip = [](const std::string& s) {
    auto p = s.find_first_not_of('0');
    return p == std::string::npos ? std::string() : s.substr(p);
  };
  std::string x = strip(a), y = strip(b);
  if (x.size() != y.size()) return x.size() < y.size();
  if (x != y) return x < y;
  return a < b;
}

struct VocabTerm {
  std::string code;
  std::string canonical;
  bool is_pt;
  std::set<std::string> grams;
};

struct BruteResult {
  std::optional<std::size_t> index;  // into the term list
  bool exact = false;
  double score = 0.0;
};

// Exhaustive matcher: exact canonical hit first (PT before LLT, lowest code),
// else the best Dice score >= threshold with ties to PT, then lowest code.
inline BruteResult brute_match(const std::string& canonical, const std::vector<VocabTerm>& terms,
                               double threshold, bool fuzzy) {
  BruteResult r;
  if (canonical.empty()) return r;
  auto better = [&](std::size_t i, double si, std::size_t j, double sj) {
    if (si != sj) return si > sj;
    if (terms[i].is_pt != terms[j].is_pt) return terms[i].is_pt;
    return code_before(terms[i].code, terms[j].code);
  };
  for (std::size_t i = 0; i < terms.size(); ++i) {
    if (terms[i].canonical != canonical) continue;
    if (!r.index || better(i, 1.0, *r.index, 1.0)) r.index = i;
  }
  if (r.index) {
    r.exact = true;
    r.score = 1.0;
    return r;
  }
  if (!fuzzy) return r;
  auto q = bigrams(canonical);
  for (std::size_t i = 0; i < terms.size(); ++i) {
    double s = dice(q, terms[i].grams);
    if (s < threshold) continue;
    if (!r.index || better(i, s, *r.index, r.score)) {
      r.index = i;
      r.score = s;
    }
  }
  return r;
}

// Random lowercase-ish words over a small alphabet so collisions and ties
// are frequent; decorated with case, punctuation and grading suffixes.
class TermGenerator {
 public:
  explicit TermGenerator(std::uint64_t seed) : rng_(seed) {}

  std::string word() {
    static const std::string alpha = "aeinorstuhg";
    std::uniform_int_distribution<int> len(1, 9);
    std::uniform_int_distribution<std::size_t> pick(0, alpha.size() - 1);
    std::string w;
    for (int i = len(rng_); i > 0; --i) w.push_back(alpha[pick(rng_)]);
    return w;
  }

  std::string term() {
    std::uniform_int_distribution<int> words(1, 3);
    std::string t;
    for (int i = words(rng_); i > 0; --i) {
      if (!t.empty()) t.push_back(' ');
      t += word();
    }
    return t;
  }

  // Typo-style edit of an existing term plus optional decoration.
  std::string variant(const std::string& base) {
    std::string s = base;
    std::uniform_int_distribution<int> op(0, 5);
    std::uniform_int_distribution<int> edits(0, 2);
    for (int e = edits(rng_); e > 0 && !s.empty(); --e) {
      std::uniform_int_distribution<std::size_t> pos(0, s.size() - 1);
      std::size_t p = pos(rng_);
      switch (op(rng_)) {
        case 0: s.erase(p, 1); break;
        case 1: s.insert(p, 1, "aeinorst"[p % 8]); break;
        case 2: s[p] = "aeinorst"[(p * 7) % 8]; break;
        case 3: if (p + 1 < s.size()) std::swap(s[p], s[p + 1]); break;
        default: break;
      }
    }
    std::uniform_int_distribution<int> deco(0, 9);
    switch (deco(rng_)) {
      case 0: s += "?"; break;
      case 1: s += " G2"; break;
      case 2: s += " grade iv"; break;
      case 3: for (auto& c : s) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c))); break;
      case 4: s = "  " + s + " ,"; break;
      default: break;
    }
    return s;
  }

  std::mt19937_64& rng() { return rng_; }

 private:
  std::mt19937_64 rng_;
};

// ---- statistics -----------------------------------------------------------

inline double proportion(std::uint64_t events, std::uint64_t n) {
  return static_cast<double>(events) / static_cast<double>(n);
}

// Percentile by linear interpolation at rank (n - 1) p, written as a
// weighted average.
inline double percentile(std::vector<double> xs, double p) {
  std::sort(xs.begin(), xs.end());
  double rank = (static_cast<double>(xs.size()) - 1.0) * p;
  double below = std::floor(rank);
  double w = rank - below;
  auto i = static_cast<std::size_t>(below);
  auto j = std::min(i + 1, xs.size() - 1);
  return (1.0 - w) * xs[i] + w * xs[j];
}

struct OddsOracle {
  double value;
  bool corrected;
};

inline OddsOracle odds(double a, double an, double b, double bn) {
  double c = an - a, d = bn - b;
  bool corrected = a == 0 || b == 0 || c == 0 || d == 0;
  if (corrected) {
    a += 0.5;
    b += 0.5;
    c += 0.5;
    d += 0.5;
  }
  return {(a / c) / (b / d), corrected};
}

inline bool close(double x, double y, double rel = 1e-12) {
  if (x == y) return true;
  return std::fabs(x - y) <= rel * std::max(std::fabs(x), std::fabs(y));
}

// ---- registry corpora -----------------------------------------------------

// Design of one random study for the exclusion-conservation property.
struct StudyDesign {
  std::string nct;
  bool withheld = false;
  bool has_eligibility = true;
  bool has_conditions = true;
  bool malformed = false;

  // First matching rule, "" when included.
  std::string expected_reason() const {
    if (withheld) return "results_withheld";
    if (!has_eligibility) return "no_eligibility";
    if (!has_conditions) return "no_conditions";
    return "";
  }
};

inline std::string design_xml(const StudyDesign& d) {
  if (d.malformed) return "<clinical_study><id_info><nct_id>" + d.nct + "</nct_id>";
  std::ostringstream x;
  x << "<?xml version=\"1.0\"?>\n<clinical_study>\n"
    << "  <id_info><nct_id>" << d.nct << "</nct_id></id_info>\n"
    << "  <brief_title>Random study " << d.nct << "</brief_title>\n"
    << "  <overall_status>" << (d.withheld ? "Withheld" : "Completed") << "</overall_status>\n"
    << "  <phase>Phase 3</phase>\n  <study_type>Interventional</study_type>\n";
  if (d.has_conditions) x << "  <condition>Hypertension</condition>\n";
  if (d.has_eligibility) {
    x << "  <eligibility><gender>All</gender><minimum_age>18 Years</minimum_age></eligibility>\n";
  }
  x << "  <arm_group group_id=\"G1\"><arm_group_label>Drug</arm_group_label>"
       "<arm_group_type>Experimental</arm_group_type></arm_group>\n"
    << "  <clinical_results><participant_flow><started group_id=\"G1\" count=\"10\"/>"
       "</participant_flow></clinical_results>\n"
    << "</clinical_study>\n";
  return x.str();
}

}  // namespace oracle
