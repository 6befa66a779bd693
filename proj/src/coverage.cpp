#include "ctgdb/coverage.hpp"

#include <cstdio>
#include <stdexcept>
#include <vector>

#include "ctgdb/csv.hpp"

namespace ctgdb {

std::string_view to_string(MatchStage stage) {
  switch (stage) {
    case MatchStage::exact: return "exact";
    case MatchStage::fuzzy: return "fuzzy";
    case MatchStage::unmapped: return "unmapped";
  }
  return "unmapped";
}

MatchStage parse_match_stage(std::string_view s) {
  if (s == "exact") return MatchStage::exact;
  if (s == "fuzzy") return MatchStage::fuzzy;
  if (s == "unmapped") return MatchStage::unmapped;
  throw std::invalid_argument("unknown match stage '" + std::string(s) + "'");
}

double percentage(std::uint64_t part, std::uint64_t total) {
  if (total == 0) return 0.0;
  return 100.0 * static_cast<double>(part) / static_cast<double>(total);
}

double CoverageReport::unique_pct(MatchStage stage) const {
  switch (stage) {
    case MatchStage::exact: return percentage(unique_exact, unique_total());
    case MatchStage::fuzzy: return percentage(unique_fuzzy, unique_total());
    case MatchStage::unmapped: return percentage(unique_unmapped, unique_total());
  }
  return 0.0;
}

double CoverageReport::weighted_pct(MatchStage stage) const {
  switch (stage) {
    case MatchStage::exact: return percentage(weighted_exact, weighted_total());
    case MatchStage::fuzzy: return percentage(weighted_fuzzy, weighted_total());
    case MatchStage::unmapped: return percentage(weighted_unmapped, weighted_total());
  }
  return 0.0;
}

double CoverageReport::unique_mapped_pct() const {
  return percentage(unique_mapped(), unique_total());
}

double CoverageReport::weighted_mapped_pct() const {
  return percentage(weighted_mapped(), weighted_total());
}

CoverageReport coverage_report(std::span<const StageWeight> items) {
  CoverageReport r;
  for (const auto& [stage, weight] : items) {
    switch (stage) {
      case MatchStage::exact:
        ++r.unique_exact;
        r.weighted_exact += weight;
        break;
      case MatchStage::fuzzy:
        ++r.unique_fuzzy;
        r.weighted_fuzzy += weight;
        break;
      case MatchStage::unmapped:
        ++r.unique_unmapped;
        r.weighted_unmapped += weight;
        break;
    }
  }
  return r;
}

namespace {

std::string grouped(std::uint64_t n) {
  std::string digits = std::to_string(n);
  std::string out;
  int count = 0;
  for (auto it = digits.rbegin(); it != digits.rend(); ++it) {
    if (count && count % 3 == 0) out.insert(out.begin(), ',');
    out.insert(out.begin(), *it);
    ++count;
  }
  return out;
}

std::string pct2(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

}  // namespace

std::string format_coverage_table(const CoverageReport& r, std::string_view title) {
  struct Line {
    std::string label;
    std::uint64_t unique;
    double unique_pct;
    std::uint64_t weighted;
    double weighted_pct;
  };
  const std::vector<Line> body{
      {"Exact lexical match", r.unique_exact, r.unique_pct(MatchStage::exact), r.weighted_exact,
       r.weighted_pct(MatchStage::exact)},
      {"Fuzzy (bigram) match", r.unique_fuzzy, r.unique_pct(MatchStage::fuzzy), r.weighted_fuzzy,
       r.weighted_pct(MatchStage::fuzzy)},
      {"Unmapped", r.unique_unmapped, r.unique_pct(MatchStage::unmapped), r.weighted_unmapped,
       r.weighted_pct(MatchStage::unmapped)},
  };
  const std::vector<Line> totals{
      {"Total mapped", r.unique_mapped(), r.unique_mapped_pct(), r.weighted_mapped(),
       r.weighted_mapped_pct()},
      {"Total", r.unique_total(), r.unique_total() ? 100.0 : 0.0, r.weighted_total(),
       r.weighted_total() ? 100.0 : 0.0},
  };

  char buf[256];
  std::string out(title);
  out += "\n";
  std::snprintf(buf, sizeof buf, "%-22s %14s %10s %22s %10s\n", "Mapping category", "Unique strings",
                "Pct (%)", "Participants affected", "Pct (%)");
  out += buf;
  const std::string rule(82, '-');
  out += rule + "\n";
  auto emit = [&](const Line& l) {
    std::snprintf(buf, sizeof buf, "%-22s %14s %10s %22s %10s\n", l.label.c_str(),
                  grouped(l.unique).c_str(), pct2(l.unique_pct).c_str(),
                  grouped(l.weighted).c_str(), pct2(l.weighted_pct).c_str());
    out += buf;
  };
  for (const auto& l : body) emit(l);
  out += rule + "\n";
  for (const auto& l : totals) emit(l);
  return out;
}

std::string format_coverage_csv(const CoverageReport& r) {
  CsvWriter w({"category", "unique_count", "unique_pct", "weighted_count", "weighted_pct"});
  auto row = [&](std::string name, std::uint64_t u, double up, std::uint64_t wt, double wp) {
    w.add({std::move(name), std::to_string(u), format_real(up), std::to_string(wt), format_real(wp)});
  };
  row("exact", r.unique_exact, r.unique_pct(MatchStage::exact), r.weighted_exact,
      r.weighted_pct(MatchStage::exact));
  row("fuzzy", r.unique_fuzzy, r.unique_pct(MatchStage::fuzzy), r.weighted_fuzzy,
      r.weighted_pct(MatchStage::fuzzy));
  row("unmapped", r.unique_unmapped, r.unique_pct(MatchStage::unmapped), r.weighted_unmapped,
      r.weighted_pct(MatchStage::unmapped));
  row("total_mapped", r.unique_mapped(), r.unique_mapped_pct(), r.weighted_mapped(),
      r.weighted_mapped_pct());
  row("total", r.unique_total(), r.unique_total() ? 100.0 : 0.0, r.weighted_total(),
      r.weighted_total() ? 100.0 : 0.0);
  return w.text();
}

}  // namespace ctgdb
