#include "ctgdb/emit.hpp"

#include <algorithm>
#include <cctype>
#include <set>
#include <unordered_map>

namespace ctgdb {

std::string_view to_string(EthnicityCategory c) {
  switch (c) {
    case EthnicityCategory::hispanic_or_latino: return "hispanic_or_latino";
    case EthnicityCategory::not_hispanic_or_latino: return "not_hispanic_or_latino";
    case EthnicityCategory::unknown_or_not_reported: return "unknown_or_not_reported";
    case EthnicityCategory::unharmonized: return "unharmonized";
  }
  return "unharmonized";
}

namespace {

EthnicityCategory parse_category(std::string_view s) {
  for (auto c : {EthnicityCategory::hispanic_or_latino, EthnicityCategory::not_hispanic_or_latino,
                 EthnicityCategory::unknown_or_not_reported}) {
    if (to_string(c) == s) return c;
  }
  throw std::invalid_argument("unknown harmonized ethnicity category '" + std::string(s) + "'");
}

std::string bool_field(bool v) { return v ? "1" : "0"; }

Field opt_count(const std::optional<std::uint64_t>& v) {
  if (!v) return std::nullopt;
  return std::to_string(*v);
}

Field opt_text(const std::optional<std::string>& v) {
  if (!v || v->empty()) return std::nullopt;
  return *v;
}

Field non_empty(const std::string& v) {
  if (v.empty()) return std::nullopt;
  return v;
}

std::string join(const std::vector<std::string>& items, std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i) out += sep;
    out += items[i];
  }
  return out;
}

}  // namespace

std::string EthnicityMap::key(std::string_view raw) {
  std::string out;
  bool space = false;
  for (char c : raw) {
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

EthnicityMap EthnicityMap::load(const std::filesystem::path& path) {
  auto lines = read_tsv_file(path);
  if (lines.empty() || lines.front().fields.size() != 2 || lines.front().fields[0] != "raw_value" ||
      lines.front().fields[1] != "harmonized_category") {
    throw std::invalid_argument(path.string() + ": expected header raw_value<TAB>harmonized_category");
  }
  EthnicityMap m;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto& l = lines[i];
    if (l.fields.size() != 2) {
      throw std::invalid_argument(path.string() + " line " + std::to_string(l.line) +
                                  ": expected 2 columns");
    }
    try {
      m.add(l.fields[0], parse_category(l.fields[1]));
    } catch (const std::invalid_argument& e) {
      throw std::invalid_argument(path.string() + " line " + std::to_string(l.line) + ": " + e.what());
    }
  }
  return m;
}

void EthnicityMap::add(std::string_view raw, EthnicityCategory category) {
  entries_[key(raw)] = category;
}

HarmonizedEthnicity EthnicityMap::harmonize(std::string_view raw) const {
  auto it = entries_.find(key(raw));
  if (it == entries_.end()) return {EthnicityCategory::unharmonized, std::string(raw)};
  return {it->second, std::string(raw)};
}

std::optional<HarmonizedEthnicity> EthnicityMap::harmonize(const std::optional<std::string>& raw) const {
  if (!raw) return std::nullopt;
  return harmonize(std::string_view(*raw));
}

void sort_by_primary_key(TableData& table) {
  const TableSchema& s = *table.schema;
  std::vector<std::pair<std::size_t, bool>> keys;  // column index, numeric
  for (const auto& k : s.primary_key) {
    std::size_t idx = s.column_index(k);
    keys.emplace_back(idx, s.columns[idx].type.kind == ColumnKind::integer);
  }
  std::stable_sort(table.rows.begin(), table.rows.end(), [&](const Row& a, const Row& b) {
    for (const auto& [idx, numeric] : keys) {
      const std::string& x = *a[idx];
      const std::string& y = *b[idx];
      if (numeric) {
        long long nx = std::stoll(x);
        long long ny = std::stoll(y);
        if (nx != ny) return nx < ny;
      } else if (x != y) {
        return x < y;
      }
    }
    return false;
  });
}

std::vector<TableData> build_tables(const EmitInputs& in) {
  if (in.dictionary == nullptr || in.ethnicity == nullptr) {
    throw std::invalid_argument("build_tables needs a dictionary and an ethnicity map");
  }
  std::unordered_map<std::string, const TermMapping*> ae_map;
  for (const auto& m : in.ae_mappings) ae_map.emplace(m.reported_string, &m);
  std::unordered_map<std::string, const TermMapping*> cond_map;
  for (const auto& m : in.condition_mappings) cond_map.emplace(m.reported_string, &m);

  std::unordered_map<std::string, TableData> t;
  for (const auto& s : ctgdb_schemas()) t[s.name].schema = &s;

  std::set<std::string> ethnicity_raw;
  for (const auto& st : in.studies) {
    const auto& el = st.eligibility;
    t["clinical_trial"].rows.push_back(
        {st.nct_id, st.brief_title, opt_text(st.official_title), opt_text(st.summary),
         st.registry_url, std::string(to_string(st.status)), std::string(to_string(st.phase)),
         std::string(to_string(st.study_type)),
         st.healthy_volunteers ? Field(bool_field(*st.healthy_volunteers)) : std::nullopt,
         el.minimum_age ? Field(format_real(el.minimum_age->days())) : std::nullopt,
         el.maximum_age ? Field(format_real(el.maximum_age->days())) : std::nullopt,
         std::string(to_string(el.sex)), opt_text(el.criteria_text), bool_field(el.age_range_inverted),
         st.countries.empty() ? Field() : Field(join(st.countries, ";"))});

    for (std::size_t i = 0; i < st.conditions.size(); ++i) {
      auto it = cond_map.find(st.conditions[i]);
      if (it == cond_map.end()) {
        throw EmitError(st.nct_id + ": condition '" + st.conditions[i] + "' has no mapping");
      }
      const TermMapping& m = *it->second;
      t["ct_conditions"].rows.push_back({st.nct_id, std::to_string(i + 1), st.conditions[i],
                                         m.canonical_string, m.matched_code, m.matched_pt_code,
                                         std::string(to_string(m.stage)), format_real(m.similarity)});
    }

    for (std::size_t i = 0; i < st.interventions.size(); ++i) {
      const auto& iv = st.interventions[i];
      t["ct_interventions"].rows.push_back(
          {st.nct_id, std::to_string(i + 1), std::string(to_string(iv.intervention_type)), iv.name,
           iv.arm_refs.empty() ? Field() : Field(join(iv.arm_refs, ";"))});
    }

    for (std::size_t i = 0; i < st.arms.size(); ++i) {
      const auto& arm = st.arms[i];
      t["ct_arms"].rows.push_back({arm.arm_key, st.nct_id, std::to_string(i + 1),
                                   non_empty(arm.group_id), arm.label,
                                   opt_text(arm.reported_type), std::string(to_string(arm.arm_type)),
                                   opt_count(arm.participants_started)});

      std::size_t ordinal = 0;
      auto demo = [&](std::string measure, double value, Field raw = {}, Field category = {}) {
        t["ct_arm_demographics"].rows.push_back({arm.arm_key, std::to_string(++ordinal),
                                                 std::move(measure), std::move(raw),
                                                 std::move(category), format_real(value)});
      };
      if (arm.sex_counts) {
        demo("sex_female", static_cast<double>(arm.sex_counts->female));
        demo("sex_male", static_cast<double>(arm.sex_counts->male));
      }
      if (arm.age_summary) {
        if (arm.age_summary->mean) demo("age_mean", *arm.age_summary->mean);
        if (arm.age_summary->sd) demo("age_sd", *arm.age_summary->sd);
        if (arm.age_summary->median) demo("age_median", *arm.age_summary->median);
      }
      for (const auto& e : arm.ethnicity_counts) {
        HarmonizedEthnicity h = in.ethnicity->harmonize(std::string_view(e.raw));
        ethnicity_raw.insert(e.raw);
        demo("ethnicity", static_cast<double>(e.count), e.raw, std::string(to_string(h.category)));
      }
    }

    for (std::size_t i = 0; i < st.ae_rows.size(); ++i) {
      const auto& r = st.ae_rows[i];
      Field term;
      Field pt;
      if (!r.reported_term.empty()) {
        auto it = ae_map.find(r.reported_term);
        if (it == ae_map.end()) {
          throw EmitError(st.nct_id + ": adverse event term '" + r.reported_term + "' has no mapping");
        }
        term = r.reported_term;
        pt = it->second->matched_pt_code;
      }
      std::optional<std::uint64_t> started;
      if (r.arm_key) {
        if (const ArmRecord* arm = st.find_arm(*r.arm_key)) started = arm->participants_started;
      }
      t["ct_ae_counts"].rows.push_back(
          {st.nct_id, std::to_string(i + 1), r.arm_key ? Field(*r.arm_key) : Field(),
           r.arm_ref, bool_field(r.resolved()), term, pt,
           std::string(to_string(r.seriousness)), std::to_string(r.participants_affected),
           opt_count(r.participants_at_risk), opt_count(started), opt_text(r.organ_system_raw),
           bool_field(r.counts_inconsistent)});
    }
  }

  for (const auto& e : in.dictionary->entries()) {
    t["term_dictionary"].rows.push_back({e.code, e.text, std::string(to_string(e.level)),
                                         e.parent_pt_code, e.soc_code, e.umls_cui});
  }
  for (const auto& m : in.ae_mappings) {
    t["term_mapping"].rows.push_back({m.reported_string, m.canonical_string, m.matched_code,
                                      m.matched_pt_code, std::string(to_string(m.stage)),
                                      format_real(m.similarity), m.stripped_suffix});
  }
  for (const auto& raw : ethnicity_raw) {
    t["ethnicity_harmonization"].rows.push_back(
        {raw, std::string(to_string(in.ethnicity->harmonize(std::string_view(raw)).category))});
  }

  std::vector<TableData> out;
  for (const auto& s : ctgdb_schemas()) {
    TableData data = std::move(t[s.name]);
    sort_by_primary_key(data);
    out.push_back(std::move(data));
  }
  return out;
}

std::string table_csv(const TableData& table) {
  CsvWriter w(table.schema->column_names());
  for (const auto& row : table.rows) w.add(row);
  return w.text();
}

std::vector<EmittedTable> write_tables(const std::vector<TableData>& tables,
                                       const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  std::vector<EmittedTable> out;
  for (const auto& t : tables) {
    auto path = dir / (t.schema->name + ".csv");
    write_file(path, table_csv(t));
    out.push_back({t.schema->name, path, t.rows.size()});
  }
  return out;
}

std::vector<EmittedTable> emit_tables(const EmitInputs& in, const std::filesystem::path& dir) {
  return write_tables(build_tables(in), dir);
}

}  // namespace ctgdb
