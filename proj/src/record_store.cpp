#include "ctgdb/record_store.hpp"

#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "ctgdb/csv.hpp"

namespace ctgdb {

using json = nlohmann::ordered_json;

namespace {

template <typename T>
json opt(const std::optional<T>& v) {
  return v ? json(*v) : json(nullptr);
}

template <typename T>
std::optional<T> get_opt(const json& j, const char* key) {
  const json& v = j.at(key);
  if (v.is_null()) return std::nullopt;
  return v.get<T>();
}

json age_json(const std::optional<AgeLimit>& a) {
  if (!a) return nullptr;
  return json{{"value", a->value}, {"unit", to_string(a->unit)}};
}

std::optional<AgeLimit> age_from(const json& j) {
  if (j.is_null()) return std::nullopt;
  return AgeLimit{j.at("value").get<double>(),
                  enum_from_string<AgeUnit>(j.at("unit").get<std::string>())};
}

}  // namespace

std::string serialize_study(const StudyRecord& s) {
  json j;
  j["nct_id"] = s.nct_id;
  j["brief_title"] = s.brief_title;
  j["official_title"] = opt(s.official_title);
  j["summary"] = opt(s.summary);
  j["registry_url"] = s.registry_url;
  j["status"] = to_string(s.status);
  j["phase"] = to_string(s.phase);
  j["study_type"] = to_string(s.study_type);
  j["conditions"] = s.conditions;

  json interventions = json::array();
  for (const auto& i : s.interventions) {
    interventions.push_back(
        {{"type", to_string(i.intervention_type)}, {"name", i.name}, {"arm_refs", i.arm_refs}});
  }
  j["interventions"] = std::move(interventions);

  const auto& e = s.eligibility;
  j["eligibility"] = {{"minimum_age", age_json(e.minimum_age)},
                      {"maximum_age", age_json(e.maximum_age)},
                      {"sex", to_string(e.sex)},
                      {"criteria_text", opt(e.criteria_text)},
                      {"age_range_inverted", e.age_range_inverted}};
  j["healthy_volunteers"] = opt(s.healthy_volunteers);

  json arms = json::array();
  for (const auto& a : s.arms) {
    json arm;
    arm["arm_key"] = a.arm_key;
    arm["group_id"] = a.group_id;
    arm["label"] = a.label;
    arm["reported_type"] = opt(a.reported_type);
    arm["arm_type"] = to_string(a.arm_type);
    arm["participants_started"] = opt(a.participants_started);
    arm["sex_counts"] = a.sex_counts
                            ? json{{"female", a.sex_counts->female}, {"male", a.sex_counts->male}}
                            : json(nullptr);
    arm["age_summary"] = a.age_summary ? json{{"mean", opt(a.age_summary->mean)},
                                              {"sd", opt(a.age_summary->sd)},
                                              {"median", opt(a.age_summary->median)}}
                                       : json(nullptr);
    json eth = json::array();
    for (const auto& c : a.ethnicity_counts) eth.push_back({{"raw", c.raw}, {"count", c.count}});
    arm["ethnicity_counts"] = std::move(eth);
    arms.push_back(std::move(arm));
  }
  j["arms"] = std::move(arms);

  json rows = json::array();
  for (const auto& r : s.ae_rows) {
    rows.push_back({{"arm_ref", r.arm_ref},
                    {"arm_key", opt(r.arm_key)},
                    {"reported_term", r.reported_term},
                    {"seriousness", to_string(r.seriousness)},
                    {"participants_affected", r.participants_affected},
                    {"participants_at_risk", opt(r.participants_at_risk)},
                    {"organ_system_raw", opt(r.organ_system_raw)},
                    {"counts_inconsistent", r.counts_inconsistent}});
  }
  j["ae_rows"] = std::move(rows);
  j["countries"] = s.countries;
  return j.dump(-1, ' ', false, json::error_handler_t::replace);
}

StudyRecord deserialize_study(std::string_view line) {
  json j = json::parse(line);
  StudyRecord s;
  s.nct_id = j.at("nct_id").get<std::string>();
  s.brief_title = j.at("brief_title").get<std::string>();
  s.official_title = get_opt<std::string>(j, "official_title");
  s.summary = get_opt<std::string>(j, "summary");
  s.registry_url = j.at("registry_url").get<std::string>();
  s.status = enum_from_string<StudyStatus>(j.at("status").get<std::string>());
  s.phase = enum_from_string<Phase>(j.at("phase").get<std::string>());
  s.study_type = enum_from_string<StudyType>(j.at("study_type").get<std::string>());
  s.conditions = j.at("conditions").get<std::vector<std::string>>();
  for (const auto& i : j.at("interventions")) {
    s.interventions.push_back(
        {enum_from_string<InterventionType>(i.at("type").get<std::string>()),
         i.at("name").get<std::string>(), i.at("arm_refs").get<std::vector<std::string>>()});
  }
  const json& e = j.at("eligibility");
  s.eligibility.minimum_age = age_from(e.at("minimum_age"));
  s.eligibility.maximum_age = age_from(e.at("maximum_age"));
  s.eligibility.sex = enum_from_string<Sex>(e.at("sex").get<std::string>());
  s.eligibility.criteria_text = get_opt<std::string>(e, "criteria_text");
  s.eligibility.age_range_inverted = e.at("age_range_inverted").get<bool>();
  s.healthy_volunteers = get_opt<bool>(j, "healthy_volunteers");

  for (const auto& a : j.at("arms")) {
    ArmRecord arm;
    arm.arm_key = a.at("arm_key").get<std::string>();
    arm.group_id = a.at("group_id").get<std::string>();
    arm.label = a.at("label").get<std::string>();
    arm.reported_type = get_opt<std::string>(a, "reported_type");
    arm.arm_type = enum_from_string<ArmType>(a.at("arm_type").get<std::string>());
    arm.participants_started = get_opt<std::uint64_t>(a, "participants_started");
    if (const json& sc = a.at("sex_counts"); !sc.is_null()) {
      arm.sex_counts = SexCounts{sc.at("female").get<std::uint64_t>(), sc.at("male").get<std::uint64_t>()};
    }
    if (const json& as = a.at("age_summary"); !as.is_null()) {
      arm.age_summary = AgeSummary{get_opt<double>(as, "mean"), get_opt<double>(as, "sd"),
                                   get_opt<double>(as, "median")};
    }
    for (const auto& c : a.at("ethnicity_counts")) {
      arm.ethnicity_counts.push_back({c.at("raw").get<std::string>(), c.at("count").get<std::uint64_t>()});
    }
    s.arms.push_back(std::move(arm));
  }
  for (const auto& r : j.at("ae_rows")) {
    AeCountRow row;
    row.arm_ref = r.at("arm_ref").get<std::string>();
    row.arm_key = get_opt<std::string>(r, "arm_key");
    row.reported_term = r.at("reported_term").get<std::string>();
    row.seriousness = enum_from_string<Seriousness>(r.at("seriousness").get<std::string>());
    row.participants_affected = r.at("participants_affected").get<std::uint64_t>();
    row.participants_at_risk = get_opt<std::uint64_t>(r, "participants_at_risk");
    row.organ_system_raw = get_opt<std::string>(r, "organ_system_raw");
    row.counts_inconsistent = r.at("counts_inconsistent").get<bool>();
    s.ae_rows.push_back(std::move(row));
  }
  s.countries = j.at("countries").get<std::vector<std::string>>();
  return s;
}

std::string serialize_studies(std::span<const StudyRecord> studies) {
  std::string out;
  for (const auto& s : studies) {
    out += serialize_study(s);
    out.push_back('\n');
  }
  return out;
}

std::vector<StudyRecord> deserialize_studies(std::string_view text) {
  std::vector<StudyRecord> out;
  std::size_t start = 0;
  std::size_t line = 0;
  while (start < text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    ++line;
    std::string_view record = text.substr(start, end - start);
    if (!record.empty()) {
      try {
        out.push_back(deserialize_study(record));
      } catch (const std::exception& e) {
        throw std::runtime_error("study store line " + std::to_string(line) + ": " + e.what());
      }
    }
    start = end + 1;
  }
  return out;
}

void write_study_store(const std::filesystem::path& path, std::span<const StudyRecord> studies) {
  write_file(path, serialize_studies(studies));
}

std::vector<StudyRecord> read_study_store(const std::filesystem::path& path) {
  return deserialize_studies(read_file(path));
}

}  // namespace ctgdb
