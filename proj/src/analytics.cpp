#include "ctgdb/analytics.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>

#include "ctgdb/csv.hpp"

namespace ctgdb {

std::vector<EventGroup> load_event_groups(const std::filesystem::path& path) {
  auto lines = read_tsv_file(path);
  if (lines.empty() || lines.front().fields != std::vector<std::string>{"group_name", "pt_code"}) {
    throw std::invalid_argument(path.string() + ": expected header group_name<TAB>pt_code");
  }
  std::map<std::string, EventGroup> groups;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto& l = lines[i];
    if (l.fields.size() != 2 || l.fields[0].empty() || l.fields[1].empty()) {
      throw std::invalid_argument(path.string() + " line " + std::to_string(l.line) +
                                  ": expected group_name<TAB>pt_code");
    }
    auto& g = groups[l.fields[0]];
    g.name = l.fields[0];
    g.pt_codes.insert(l.fields[1]);
  }
  std::vector<EventGroup> out;
  for (auto& [name, g] : groups) out.push_back(std::move(g));
  return out;
}

void validate_event_group(const EventGroup& group, const TermDictionary& dict) {
  if (group.pt_codes.empty()) throw UnknownPtCodeError(group.name, "<empty group>");
  for (const auto& code : group.pt_codes) {
    const TermEntry* e = dict.find(code);
    if (e == nullptr || e->level != TermLevel::PT) throw UnknownPtCodeError(group.name, code);
  }
}

MappingIndex index_mappings(std::span<const TermMapping> mappings) {
  MappingIndex index;
  index.reserve(mappings.size());
  for (const auto& m : mappings) index.emplace(m.reported_string, &m);
  return index;
}

std::map<std::string, GroupCount> group_events(std::span<const StudyRecord> studies,
                                               const MappingIndex& mappings,
                                               const EventGroup& group, const TermDictionary& dict,
                                               bool serious_only) {
  validate_event_group(group, dict);
  std::map<std::string, GroupCount> out;
  for (const auto& study : studies) {
    for (const auto& row : study.ae_rows) {
      if (!row.arm_key) continue;
      if (serious_only && row.seriousness != Seriousness::serious) continue;
      auto it = mappings.find(row.reported_term);
      if (it == mappings.end() || !it->second->matched_pt_code) continue;
      if (!group.pt_codes.count(*it->second->matched_pt_code)) continue;
      auto& c = out[*row.arm_key];
      c.n_ae += row.participants_affected;
      ++c.rows;
    }
  }
  return out;
}

double arm_proportion(std::uint64_t n_ae, std::optional<std::uint64_t> n_started) {
  if (!n_started || *n_started == 0) {
    throw UndefinedDenominatorError("arm proportion undefined: participants started is " +
                                    std::string(n_started ? "0" : "absent"));
  }
  return static_cast<double>(n_ae) / static_cast<double>(*n_started);
}

double quantile_linear(std::span<const double> sorted, double p) {
  if (sorted.empty()) throw std::invalid_argument("quantile of an empty sample");
  if (p < 0.0 || p > 1.0) throw std::invalid_argument("quantile probability outside [0, 1]");
  const double h = static_cast<double>(sorted.size() - 1) * p;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

PlaceboReference placebo_reference(std::span<const ArmEventStat> arms) {
  PlaceboReference ref;
  std::vector<double> values;
  for (const auto& a : arms) {
    if (!a.is_placebo || a.capped || a.n_started == 0) continue;
    ref.pooled_arms.push_back(a);
    ref.pooled_n_ae += a.n_ae;
    ref.pooled_n_started += a.n_started;
    values.push_back(a.p_arm);
  }
  if (values.empty()) throw EmptyReferenceError("no placebo arms with a usable denominator");
  std::sort(values.begin(), values.end());
  ref.q75 = quantile_linear(values, 0.75);
  ref.max_p = values.back();
  return ref;
}

OddsRatio odds_ratio(std::uint64_t a_events, std::uint64_t a_n, std::uint64_t b_events,
                     std::uint64_t b_n) {
  if (a_n == 0 || b_n == 0 || a_events > a_n || b_events > b_n) {
    throw InvalidCountsError("odds ratio needs 0 <= events <= n and n > 0, got (" +
                             std::to_string(a_events) + "/" + std::to_string(a_n) + ", " +
                             std::to_string(b_events) + "/" + std::to_string(b_n) + ")");
  }
  double a = static_cast<double>(a_events);
  double a_non = static_cast<double>(a_n - a_events);
  double b = static_cast<double>(b_events);
  double b_non = static_cast<double>(b_n - b_events);
  OddsRatio r;
  if (a == 0 || a_non == 0 || b == 0 || b_non == 0) {
    a += 0.5;
    a_non += 0.5;
    b += 0.5;
    b_non += 0.5;
    r.corrected = true;
  }
  r.value = (a * b_non) / (a_non * b);
  return r;
}

namespace {

std::string fold(std::string_view s) {
  std::string out;
  bool space = false;
  for (char c : s) {
    auto u = static_cast<unsigned char>(c);
    if (std::isalnum(u) || u >= 0x80) {
      if (space && !out.empty()) out.push_back(' ');
      space = false;
      out.push_back(static_cast<char>(std::tolower(u)));
    } else {
      space = true;
    }
  }
  return out;
}

bool names_placebo(std::string_view name) {
  std::string f = " " + fold(name) + " ";
  return f.find(" placebo ") != std::string::npos;
}

bool restricted_phase(Phase p) { return p == Phase::phase3 || p == Phase::phase4; }

std::string flag(bool v) { return v ? "true" : "false"; }

}  // namespace

bool is_product_arm(ArmType type) {
  return type == ArmType::active || type == ArmType::comparator || type == ArmType::other;
}

std::string product_label(const StudyRecord& study, const ArmRecord& arm) {
  if (arm.arm_type == ArmType::placebo) return "Placebo";
  const std::string label = fold(arm.label);
  const InterventionRecord* any = nullptr;
  for (const auto& iv : study.interventions) {
    bool attached = std::any_of(iv.arm_refs.begin(), iv.arm_refs.end(),
                                [&](const std::string& ref) { return fold(ref) == label; });
    if (!attached || names_placebo(iv.name)) continue;
    if (iv.intervention_type == InterventionType::drug ||
        iv.intervention_type == InterventionType::biological) {
      return iv.name;
    }
    if (any == nullptr) any = &iv;
  }
  return any ? any->name : arm.label;
}

ScreeningResult screen(std::span<const StudyRecord> studies, const MappingIndex& mappings,
                       const TermDictionary& dict, const EventGroup& group,
                       const ScreenConfig& cfg) {
  ScreeningResult result;
  result.group_name = group.name;
  const auto counts = group_events(studies, mappings, group, dict, cfg.serious_only);

  std::vector<ArmEventStat> stats;
  for (const auto& study : studies) {
    for (const auto& arm : study.arms) {
      ArmEventStat s;
      s.arm_key = arm.arm_key;
      s.nct_id = study.nct_id;
      s.product_label = product_label(study, arm);
      s.phase = study.phase;
      s.arm_type = arm.arm_type;
      s.is_placebo = arm.arm_type == ArmType::placebo;
      auto it = counts.find(arm.arm_key);
      s.n_ae = it == counts.end() ? 0 : it->second.n_ae;
      try {
        s.p_arm = arm_proportion(s.n_ae, arm.participants_started);
      } catch (const UndefinedDenominatorError&) {
        result.excluded.push_back({study.nct_id, arm.arm_key,
                                   arm.participants_started ? "participants_started is 0"
                                                            : "participants_started absent"});
        continue;
      }
      s.n_started = *arm.participants_started;
      if (s.n_ae > s.n_started) {
        s.n_ae = s.n_started;
        s.capped = true;
        s.p_arm = 1.0;
        result.excluded.push_back(
            {study.nct_id, arm.arm_key, "summed n_ae exceeds participants_started; capped, not pooled"});
      }
      stats.push_back(std::move(s));
    }
  }
  std::sort(stats.begin(), stats.end(), [](const ArmEventStat& a, const ArmEventStat& b) {
    return std::tie(a.product_label, a.nct_id, a.arm_key) <
           std::tie(b.product_label, b.nct_id, b.arm_key);
  });

  result.reference = placebo_reference(stats);
  const auto& ref = result.reference;

  for (const auto& s : stats) {
    ArmScreen a;
    a.stat = s;
    a.exceeds_q75 = s.p_arm > ref.q75;
    a.exceeds_max = s.p_arm > ref.max_p;
    a.or_vs_placebo = odds_ratio(s.n_ae, s.n_started, ref.pooled_n_ae, ref.pooled_n_started);
    result.arms.push_back(std::move(a));
  }

  std::map<std::string, ProductAggregate> products;
  for (const auto& s : stats) {
    if (!is_product_arm(s.arm_type) || s.capped) continue;
    if (cfg.phase_restrict && !restricted_phase(s.phase)) continue;
    auto& p = products[s.product_label];
    p.product_label = s.product_label;
    ++p.arms;
    p.n_ae += s.n_ae;
    p.n_started += s.n_started;
  }
  for (auto& [label, p] : products) {
    p.p = static_cast<double>(p.n_ae) / static_cast<double>(p.n_started);
    p.or_vs_placebo = odds_ratio(p.n_ae, p.n_started, ref.pooled_n_ae, ref.pooled_n_started);
    result.products.push_back(p);
  }
  for (std::size_t i = 0; i < result.products.size(); ++i) {
    for (std::size_t j = i + 1; j < result.products.size(); ++j) {
      const auto& a = result.products[i];
      const auto& b = result.products[j];
      result.head_to_head.push_back(
          {a.product_label, b.product_label, odds_ratio(a.n_ae, a.n_started, b.n_ae, b.n_started)});
    }
  }
  return result;
}

std::string format_screening_csv(const ScreeningResult& r) {
  CsvWriter w({"product", "phase", "nct_id", "arm_key", "n_ae", "n_started", "p_arm", "is_placebo",
               "q75", "max_placebo", "exceeds_q75", "exceeds_max", "or_vs_placebo", "or_corrected"});
  for (const auto& a : r.arms) {
    const auto& s = a.stat;
    w.add({s.product_label, std::string(to_string(s.phase)), s.nct_id, s.arm_key,
           std::to_string(s.n_ae), std::to_string(s.n_started), format_real(s.p_arm),
           flag(s.is_placebo), format_real(r.reference.q75), format_real(r.reference.max_p),
           flag(a.exceeds_q75), flag(a.exceeds_max), format_real(a.or_vs_placebo.value),
           flag(a.or_vs_placebo.corrected)});
  }
  return w.text();
}

std::string format_product_csv(const ScreeningResult& r) {
  CsvWriter w({"product", "arms", "n_ae", "n_started", "p", "placebo_n_ae", "placebo_n_started",
               "placebo_p", "or_vs_placebo", "or_corrected"});
  const auto& ref = r.reference;
  const double placebo_p =
      static_cast<double>(ref.pooled_n_ae) / static_cast<double>(ref.pooled_n_started);
  for (const auto& p : r.products) {
    w.add({p.product_label, std::to_string(p.arms), std::to_string(p.n_ae),
           std::to_string(p.n_started), format_real(p.p), std::to_string(ref.pooled_n_ae),
           std::to_string(ref.pooled_n_started), format_real(placebo_p),
           format_real(p.or_vs_placebo.value), flag(p.or_vs_placebo.corrected)});
  }
  return w.text();
}

std::string format_head_to_head_csv(const ScreeningResult& r) {
  CsvWriter w({"product_a", "product_b", "odds_ratio", "or_corrected"});
  for (const auto& h : r.head_to_head) {
    w.add({h.product_a, h.product_b, format_real(h.odds.value), flag(h.odds.corrected)});
  }
  return w.text();
}

std::string format_exclusion_annex(const ScreeningResult& r) {
  CsvWriter w({"nct_id", "arm_key", "reason"});
  for (const auto& e : r.excluded) w.add({e.nct_id, e.arm_key, e.reason});
  return w.text();
}

std::string format_screening_summary(const ScreeningResult& r) {
  char buf[256];
  std::string out = "event group: " + r.group_name + "\n";
  const auto& ref = r.reference;
  std::snprintf(buf, sizeof buf,
                "placebo reference: %zu arms, pooled %llu/%llu, q75 %.6f, max %.6f\n",
                ref.pooled_arms.size(), static_cast<unsigned long long>(ref.pooled_n_ae),
                static_cast<unsigned long long>(ref.pooled_n_started), ref.q75, ref.max_p);
  out += buf;
  std::size_t over_q75 = 0, over_max = 0;
  for (const auto& a : r.arms) {
    over_q75 += a.exceeds_q75;
    over_max += a.exceeds_max;
  }
  std::snprintf(buf, sizeof buf, "arms: %zu screened, %zu > q75, %zu > max, %zu excluded\n",
                r.arms.size(), over_q75, over_max, r.excluded.size());
  out += buf;
  std::snprintf(buf, sizeof buf, "%-24s %6s %10s %10s %10s %10s\n", "product", "arms", "n_ae",
                "n_started", "p", "OR");
  out += buf;
  for (const auto& p : r.products) {
    std::snprintf(buf, sizeof buf, "%-24s %6zu %10llu %10llu %10.6f %10.6f%s\n",
                  p.product_label.c_str(), p.arms, static_cast<unsigned long long>(p.n_ae),
                  static_cast<unsigned long long>(p.n_started), p.p, p.or_vs_placebo.value,
                  p.or_vs_placebo.corrected ? " (corrected)" : "");
    out += buf;
  }
  return out;
}

}  // namespace ctgdb
