#include "ctgdb/registry.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <cctype>
#include <charconv>
#include <cstdio>
#include <map>
#include <sstream>
#include <thread>
#include <unordered_set>

#include <expat.h>

#include "ctgdb/csv.hpp"
#include "ctgdb/kv.hpp"

namespace ctgdb {

// ---------------------------------------------------------------------------
// Enum spellings

namespace {

template <typename E, std::size_t N>
struct EnumNames {
  std::array<std::pair<E, std::string_view>, N> names;

  std::string_view name(E v) const {
    for (const auto& [e, n] : names) {
      if (e == v) return n;
    }
    return "?";
  }
  E value(std::string_view s) const {
    for (const auto& [e, n] : names) {
      if (n == s) return e;
    }
    throw std::invalid_argument("unknown enum value '" + std::string(s) + "'");
  }
};

constexpr EnumNames<StudyStatus, 5> kStatus{{{{StudyStatus::recruiting, "recruiting"},
                                              {StudyStatus::completed, "completed"},
                                              {StudyStatus::withdrawn, "withdrawn"},
                                              {StudyStatus::withheld, "withheld"},
                                              {StudyStatus::other, "other"}}}};
constexpr EnumNames<Phase, 9> kPhase{{{{Phase::early_phase1, "early_phase1"},
                                       {Phase::phase1, "phase1"},
                                       {Phase::phase1_2, "phase1_2"},
                                       {Phase::phase2, "phase2"},
                                       {Phase::phase2_3, "phase2_3"},
                                       {Phase::phase3, "phase3"},
                                       {Phase::phase4, "phase4"},
                                       {Phase::not_applicable, "not_applicable"},
                                       {Phase::unknown, "unknown"}}}};
constexpr EnumNames<StudyType, 4> kStudyType{{{{StudyType::interventional, "interventional"},
                                               {StudyType::observational, "observational"},
                                               {StudyType::expanded_access, "expanded_access"},
                                               {StudyType::other, "other"}}}};
constexpr EnumNames<Sex, 4> kSex{{{{Sex::all, "all"},
                                   {Sex::female, "female"},
                                   {Sex::male, "male"},
                                   {Sex::unspecified, "unspecified"}}}};
constexpr EnumNames<ArmType, 6> kArmType{{{{ArmType::placebo, "placebo"},
                                           {ArmType::active, "active"},
                                           {ArmType::comparator, "comparator"},
                                           {ArmType::sham, "sham"},
                                           {ArmType::no_intervention, "no_intervention"},
                                           {ArmType::other, "other"}}}};
constexpr EnumNames<Seriousness, 2> kSeriousness{
    {{{Seriousness::serious, "serious"}, {Seriousness::other, "other"}}}};
constexpr EnumNames<InterventionType, 6> kInterventionType{
    {{{InterventionType::drug, "drug"},
      {InterventionType::biological, "biological"},
      {InterventionType::device, "device"},
      {InterventionType::procedure, "procedure"},
      {InterventionType::behavioral, "behavioral"},
      {InterventionType::other, "other"}}}};
constexpr EnumNames<AgeUnit, 4> kAgeUnit{{{{AgeUnit::years, "years"},
                                           {AgeUnit::months, "months"},
                                           {AgeUnit::weeks, "weeks"},
                                           {AgeUnit::days, "days"}}}};

std::string lower_ascii(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

std::string_view trim(std::string_view s) {
  auto ws = [](char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r'; };
  while (!s.empty() && ws(s.front())) s.remove_prefix(1);
  while (!s.empty() && ws(s.back())) s.remove_suffix(1);
  return s;
}

// Lowercase ASCII with runs of non-alphanumerics collapsed to one space.
std::string fold_label(std::string_view s) {
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

}  // namespace

std::string_view to_string(StudyStatus v) { return kStatus.name(v); }
std::string_view to_string(Phase v) { return kPhase.name(v); }
std::string_view to_string(StudyType v) { return kStudyType.name(v); }
std::string_view to_string(Sex v) { return kSex.name(v); }
std::string_view to_string(ArmType v) { return kArmType.name(v); }
std::string_view to_string(Seriousness v) { return kSeriousness.name(v); }
std::string_view to_string(InterventionType v) { return kInterventionType.name(v); }
std::string_view to_string(AgeUnit v) { return kAgeUnit.name(v); }

template <>
StudyStatus enum_from_string<StudyStatus>(std::string_view s) { return kStatus.value(s); }
template <>
Phase enum_from_string<Phase>(std::string_view s) { return kPhase.value(s); }
template <>
StudyType enum_from_string<StudyType>(std::string_view s) { return kStudyType.value(s); }
template <>
Sex enum_from_string<Sex>(std::string_view s) { return kSex.value(s); }
template <>
ArmType enum_from_string<ArmType>(std::string_view s) { return kArmType.value(s); }
template <>
Seriousness enum_from_string<Seriousness>(std::string_view s) { return kSeriousness.value(s); }
template <>
InterventionType enum_from_string<InterventionType>(std::string_view s) {
  return kInterventionType.value(s);
}
template <>
AgeUnit enum_from_string<AgeUnit>(std::string_view s) { return kAgeUnit.value(s); }

StudyStatus parse_status(std::string_view text) {
  std::string s = fold_label(text);
  if (s == "recruiting") return StudyStatus::recruiting;
  if (s == "completed") return StudyStatus::completed;
  if (s == "withdrawn") return StudyStatus::withdrawn;
  if (s == "withheld") return StudyStatus::withheld;
  return StudyStatus::other;
}

Phase parse_phase(std::string_view text) {
  std::string s = fold_label(text);
  if (s == "early phase 1") return Phase::early_phase1;
  if (s == "phase 1") return Phase::phase1;
  if (s == "phase 1 phase 2" || s == "phase 1 2") return Phase::phase1_2;
  if (s == "phase 2") return Phase::phase2;
  if (s == "phase 2 phase 3" || s == "phase 2 3") return Phase::phase2_3;
  if (s == "phase 3") return Phase::phase3;
  if (s == "phase 4") return Phase::phase4;
  if (s == "n a" || s == "not applicable") return Phase::not_applicable;
  return Phase::unknown;
}

StudyType parse_study_type(std::string_view text) {
  std::string s = fold_label(text);
  if (s == "interventional") return StudyType::interventional;
  if (s.rfind("observational", 0) == 0) return StudyType::observational;
  if (s == "expanded access") return StudyType::expanded_access;
  return StudyType::other;
}

Sex parse_sex(std::string_view text) {
  std::string s = fold_label(text);
  if (s == "all" || s == "both") return Sex::all;
  if (s == "female") return Sex::female;
  if (s == "male") return Sex::male;
  return Sex::unspecified;
}

InterventionType parse_intervention_type(std::string_view text) {
  std::string s = fold_label(text);
  if (s == "drug") return InterventionType::drug;
  if (s == "biological") return InterventionType::biological;
  if (s == "device") return InterventionType::device;
  if (s == "procedure" || s == "procedure surgery") return InterventionType::procedure;
  if (s == "behavioral") return InterventionType::behavioral;
  return InterventionType::other;
}

double AgeLimit::days() const {
  switch (unit) {
    case AgeUnit::years: return value * 365.25;
    case AgeUnit::months: return value * 30.4375;
    case AgeUnit::weeks: return value * 7.0;
    case AgeUnit::days: return value;
  }
  return value;
}

std::optional<AgeLimit> parse_age(std::string_view text) {
  std::string s = fold_label(text);
  if (s.empty() || s == "n a" || s == "none") return std::nullopt;
  std::string_view t = trim(text);
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), value);
  if (ec != std::errc() || value < 0.0) {
    throw std::invalid_argument("unparseable age '" + std::string(text) + "'");
  }
  std::string unit = fold_label(std::string_view(ptr, static_cast<std::size_t>(t.data() + t.size() - ptr)));
  AgeLimit a{value, AgeUnit::years};
  if (unit == "year" || unit == "years") {
    a.unit = AgeUnit::years;
  } else if (unit == "month" || unit == "months") {
    a.unit = AgeUnit::months;
  } else if (unit == "week" || unit == "weeks") {
    a.unit = AgeUnit::weeks;
  } else if (unit == "day" || unit == "days") {
    a.unit = AgeUnit::days;
  } else {
    throw std::invalid_argument("unknown age unit in '" + std::string(text) + "'");
  }
  return a;
}

const ArmRecord* StudyRecord::find_arm(std::string_view arm_key) const {
  for (const auto& a : arms) {
    if (a.arm_key == arm_key) return &a;
  }
  return nullptr;
}

// ---------------------------------------------------------------------------
// Warnings

std::string format_warning(const IngestWarning& w) {
  std::string line = "file=" + kv_quote(w.file);
  if (w.nct_id) line += " nct_id=" + kv_quote(*w.nct_id);
  line += " code=" + kv_quote(w.code);
  line += " message=" + kv_quote(w.message, true);
  return line;
}

std::string format_warning_log(const std::vector<IngestWarning>& warnings) {
  std::string out;
  for (const auto& w : warnings) out += format_warning(w) + "\n";
  return out;
}

std::string_view to_string(ParseFailure::Kind kind) {
  return kind == ParseFailure::Kind::malformed_xml ? "malformed_xml" : "missing_nct_id";
}

// ---------------------------------------------------------------------------
// Arm classification

ArmType classify_arm(std::string_view label, std::optional<std::string_view> reported_type) {
  std::string type = reported_type ? fold_label(*reported_type) : std::string();
  std::string folded = " " + fold_label(label) + " ";
  auto has_token = [&](std::string_view token) {
    return folded.find(" " + std::string(token) + " ") != std::string::npos;
  };
  if (type == "placebo comparator" || has_token("placebo")) return ArmType::placebo;
  if (type == "sham comparator" || has_token("sham")) return ArmType::sham;
  if (type == "experimental") return ArmType::active;
  if (type == "active comparator") return ArmType::comparator;
  if (type == "no intervention") return ArmType::no_intervention;
  return ArmType::other;
}

// ---------------------------------------------------------------------------
// Streaming document parser

namespace {

enum class Node {
  root,
  required_header,
  url,
  id_info,
  nct_id,
  brief_title,
  official_title,
  brief_summary,
  brief_summary_text,
  overall_status,
  phase,
  study_type,
  condition,
  intervention,
  intervention_type,
  intervention_name,
  intervention_arm,
  eligibility,
  criteria,
  criteria_text,
  gender,
  minimum_age,
  maximum_age,
  healthy_volunteers,
  arm_group,
  arm_group_label,
  arm_group_type,
  location_countries,
  country,
  clinical_results,
  participant_flow,
  started,
  baseline,
  baseline_sex,
  baseline_age,
  baseline_ethnicity,
  reported_events,
  serious_events,
  other_events,
  category,
  category_title,
  event,
  event_sub_title,
  event_counts,
};

struct Child {
  Node parent;
  std::string_view name;
  Node node;
};

// The recognized subset of the registry document (docs/registry-subset.xsd).
constexpr Child kGrammar[] = {
    {Node::root, "required_header", Node::required_header},
    {Node::required_header, "url", Node::url},
    {Node::root, "id_info", Node::id_info},
    {Node::id_info, "nct_id", Node::nct_id},
    {Node::root, "brief_title", Node::brief_title},
    {Node::root, "official_title", Node::official_title},
    {Node::root, "brief_summary", Node::brief_summary},
    {Node::brief_summary, "textblock", Node::brief_summary_text},
    {Node::root, "overall_status", Node::overall_status},
    {Node::root, "phase", Node::phase},
    {Node::root, "study_type", Node::study_type},
    {Node::root, "condition", Node::condition},
    {Node::root, "intervention", Node::intervention},
    {Node::intervention, "intervention_type", Node::intervention_type},
    {Node::intervention, "intervention_name", Node::intervention_name},
    {Node::intervention, "arm_group_label", Node::intervention_arm},
    {Node::root, "eligibility", Node::eligibility},
    {Node::eligibility, "criteria", Node::criteria},
    {Node::criteria, "textblock", Node::criteria_text},
    {Node::eligibility, "gender", Node::gender},
    {Node::eligibility, "minimum_age", Node::minimum_age},
    {Node::eligibility, "maximum_age", Node::maximum_age},
    {Node::eligibility, "healthy_volunteers", Node::healthy_volunteers},
    {Node::root, "arm_group", Node::arm_group},
    {Node::arm_group, "arm_group_label", Node::arm_group_label},
    {Node::arm_group, "arm_group_type", Node::arm_group_type},
    {Node::root, "location_countries", Node::location_countries},
    {Node::location_countries, "country", Node::country},
    {Node::root, "clinical_results", Node::clinical_results},
    {Node::clinical_results, "participant_flow", Node::participant_flow},
    {Node::participant_flow, "started", Node::started},
    {Node::clinical_results, "baseline", Node::baseline},
    {Node::baseline, "sex", Node::baseline_sex},
    {Node::baseline, "age", Node::baseline_age},
    {Node::baseline, "ethnicity", Node::baseline_ethnicity},
    {Node::clinical_results, "reported_events", Node::reported_events},
    {Node::reported_events, "serious_events", Node::serious_events},
    {Node::reported_events, "other_events", Node::other_events},
    {Node::serious_events, "category", Node::category},
    {Node::other_events, "category", Node::category},
    {Node::category, "title", Node::category_title},
    {Node::category, "event", Node::event},
    {Node::event, "sub_title", Node::event_sub_title},
    {Node::event, "counts", Node::event_counts},
};

std::optional<Node> child_node(Node parent, std::string_view name) {
  for (const auto& c : kGrammar) {
    if (c.parent == parent && c.name == name) return c.node;
  }
  return std::nullopt;
}

// Attributes each node accepts; anything else is reported.
std::vector<std::string_view> allowed_attributes(Node n) {
  switch (n) {
    case Node::arm_group: return {"group_id"};
    case Node::started: return {"group_id", "count"};
    case Node::baseline: return {"group_id"};
    case Node::baseline_sex: return {"female", "male"};
    case Node::baseline_age: return {"mean", "sd", "median", "units"};
    case Node::baseline_ethnicity: return {"category", "count"};
    case Node::event_counts: return {"group_id", "subjects_affected", "subjects_at_risk"};
    default: return {};
  }
}

std::optional<std::uint64_t> parse_count(std::string_view s) {
  s = trim(s);
  std::uint64_t v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) return std::nullopt;
  return v;
}

std::optional<double> parse_real(std::string_view s) {
  s = trim(s);
  double v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) return std::nullopt;
  return v;
}

struct PendingArm {
  std::string group_id;
  std::string label;
  std::optional<std::string> reported_type;
};

struct PendingCount {
  std::string group_id;
  std::string term;
  Seriousness seriousness;
  std::optional<std::string> organ_system;
  std::optional<std::uint64_t> affected;
  std::optional<std::uint64_t> at_risk;
};

struct PendingBaseline {
  std::string group_id;
  std::optional<SexCounts> sex;
  std::optional<AgeSummary> age;
  std::vector<EthnicityCount> ethnicity;
};

class DocumentParser {
 public:
  explicit DocumentParser(std::string_view source) : source_(source) {
    parser_ = XML_ParserCreate("UTF-8");
    XML_SetUserData(parser_, this);
    XML_SetElementHandler(parser_, &DocumentParser::on_start, &DocumentParser::on_end);
    XML_SetCharacterDataHandler(parser_, &DocumentParser::on_text);
  }
  ~DocumentParser() { XML_ParserFree(parser_); }
  DocumentParser(const DocumentParser&) = delete;
  DocumentParser& operator=(const DocumentParser&) = delete;

  std::variant<ParsedStudy, ParseFailure> run(std::string_view xml) {
    constexpr std::size_t kChunk = 1 << 16;
    std::size_t offset = 0;
    do {
      std::size_t len = std::min(kChunk, xml.size() - offset);
      bool last = offset + len == xml.size();
      if (XML_Parse(parser_, xml.data() + offset, static_cast<int>(len), last) == XML_STATUS_ERROR) {
        if (fatal_) return *fatal_;
        std::ostringstream msg;
        msg << XML_ErrorString(XML_GetErrorCode(parser_)) << " at line "
            << XML_GetCurrentLineNumber(parser_) << ", column "
            << XML_GetCurrentColumnNumber(parser_);
        return ParseFailure{ParseFailure::Kind::malformed_xml, msg.str()};
      }
      offset += len;
    } while (offset < xml.size());
    return finish();
  }

 private:
  struct Frame {
    Node node;
    std::string text;
  };

  static void XMLCALL on_start(void* self, const XML_Char* name, const XML_Char** attrs) {
    static_cast<DocumentParser*>(self)->start(name, attrs);
  }
  static void XMLCALL on_end(void* self, const XML_Char* name) {
    static_cast<DocumentParser*>(self)->end(name);
  }
  static void XMLCALL on_text(void* self, const XML_Char* s, int len) {
    auto* p = static_cast<DocumentParser*>(self);
    if (p->skip_depth_ == 0 && !p->stack_.empty()) {
      p->stack_.back().text.append(s, static_cast<std::size_t>(len));
    }
  }

  void warn(std::string code, std::string message) {
    warnings_.push_back({std::string(source_), std::nullopt, std::move(code), std::move(message)});
  }

  std::string path() const {
    std::string p;
    for (const auto& n : names_) {
      if (!p.empty()) p.push_back('/');
      p += n;
    }
    return p;
  }

  void abort(ParseFailure failure) {
    fatal_ = std::move(failure);
    XML_StopParser(parser_, XML_FALSE);
  }

  void start(std::string_view name, const XML_Char** attrs) {
    if (skip_depth_ > 0) {
      ++skip_depth_;
      return;
    }
    names_.emplace_back(name);
    std::optional<Node> node;
    if (stack_.empty()) {
      if (name != "clinical_study") {
        abort({ParseFailure::Kind::malformed_xml,
               "root element is <" + std::string(name) + ">, expected <clinical_study>"});
        return;
      }
      node = Node::root;
    } else {
      node = child_node(stack_.back().node, name);
    }
    if (!node) {
      warn("unrecognized_element", "skipped <" + path() + ">");
      names_.pop_back();
      skip_depth_ = 1;
      return;
    }

    std::map<std::string, std::string, std::less<>> attributes;
    const auto allowed = allowed_attributes(*node);
    for (std::size_t i = 0; attrs[i] != nullptr; i += 2) {
      std::string_view key = attrs[i];
      if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
        warn("unrecognized_attribute", "ignored @" + std::string(key) + " on <" + path() + ">");
        continue;
      }
      attributes.emplace(std::string(key), std::string(attrs[i + 1]));
    }
    stack_.push_back({*node, {}});
    open(*node, attributes);
  }

  void end(std::string_view) {
    if (skip_depth_ > 0) {
      --skip_depth_;
      return;
    }
    Frame frame = std::move(stack_.back());
    stack_.pop_back();
    close(frame.node, std::string(trim(frame.text)));
    names_.pop_back();
  }

  template <typename Map>
  std::optional<std::uint64_t> count_attr(const Map& attributes, std::string_view key) {
    auto it = attributes.find(key);
    if (it == attributes.end()) return std::nullopt;
    auto v = parse_count(it->second);
    if (!v) {
      warn("invalid_value", "@" + std::string(key) + "='" + it->second + "' on <" + path() +
                                "> is not a non-negative count");
    }
    return v;
  }

  template <typename Map>
  std::optional<double> real_attr(const Map& attributes, std::string_view key) {
    auto it = attributes.find(key);
    if (it == attributes.end()) return std::nullopt;
    auto v = parse_real(it->second);
    if (!v) {
      warn("invalid_value", "@" + std::string(key) + "='" + it->second + "' on <" + path() +
                                "> is not a number");
    }
    return v;
  }

  template <typename Map>
  std::string string_attr(const Map& attributes, std::string_view key) {
    auto it = attributes.find(key);
    return it == attributes.end() ? std::string() : std::string(trim(it->second));
  }

  void open(Node node, const std::map<std::string, std::string, std::less<>>& a) {
    switch (node) {
      case Node::intervention:
        study_.interventions.emplace_back();
        break;
      case Node::arm_group:
        arms_.push_back({string_attr(a, "group_id"), {}, std::nullopt});
        break;
      case Node::started: {
        std::string gid = string_attr(a, "group_id");
        auto count = count_attr(a, "count");
        if (gid.empty()) {
          warn("missing_attribute", "<" + path() + "> without @group_id");
        } else if (count) {
          started_.emplace_back(gid, *count);
        }
        break;
      }
      case Node::baseline:
        baselines_.push_back({string_attr(a, "group_id"), std::nullopt, std::nullopt, {}});
        break;
      case Node::baseline_sex: {
        SexCounts s;
        auto f = count_attr(a, "female");
        auto m = count_attr(a, "male");
        if (f || m) {
          s.female = f.value_or(0);
          s.male = m.value_or(0);
          baselines_.back().sex = s;
        }
        break;
      }
      case Node::baseline_age: {
        AgeSummary s{real_attr(a, "mean"), real_attr(a, "sd"), real_attr(a, "median")};
        auto units = a.find("units");
        if (units != a.end() && fold_label(units->second) != "years") {
          warn("invalid_value", "age summary units '" + units->second + "' are not years; ignored");
        } else if (s.mean || s.sd || s.median) {
          baselines_.back().age = s;
        }
        break;
      }
      case Node::baseline_ethnicity: {
        std::string cat = string_attr(a, "category");
        auto count = count_attr(a, "count");
        if (cat.empty()) {
          warn("missing_attribute", "<" + path() + "> without @category");
        } else {
          baselines_.back().ethnicity.push_back({cat, count.value_or(0)});
        }
        break;
      }
      case Node::serious_events:
        seriousness_ = Seriousness::serious;
        break;
      case Node::other_events:
        seriousness_ = Seriousness::other;
        break;
      case Node::category:
        organ_system_.reset();
        break;
      case Node::event:
        event_term_.clear();
        event_first_count_ = counts_.size();
        break;
      case Node::event_counts: {
        PendingCount c;
        c.group_id = string_attr(a, "group_id");
        c.term = event_term_;
        c.seriousness = seriousness_;
        c.organ_system = organ_system_;
        c.affected = count_attr(a, "subjects_affected");
        c.at_risk = count_attr(a, "subjects_at_risk");
        counts_.push_back(std::move(c));
        break;
      }
      default:
        break;
    }
  }

  void set_once(std::optional<std::string>& slot, std::string value, std::string_view what) {
    if (slot) {
      warn("duplicate_element", "repeated <" + std::string(what) + "> ignored");
      return;
    }
    slot = std::move(value);
  }

  void close(Node node, std::string text) {
    switch (node) {
      case Node::url: set_once(url_, std::move(text), "url"); break;
      case Node::nct_id: set_once(nct_id_, std::move(text), "nct_id"); break;
      case Node::brief_title: set_once(brief_title_, std::move(text), "brief_title"); break;
      case Node::official_title:
        if (!text.empty()) set_once(study_.official_title, std::move(text), "official_title");
        break;
      case Node::brief_summary_text:
        if (!text.empty()) set_once(study_.summary, std::move(text), "brief_summary");
        break;
      case Node::overall_status: set_once(status_, std::move(text), "overall_status"); break;
      case Node::phase: set_once(phase_, std::move(text), "phase"); break;
      case Node::study_type: set_once(study_type_, std::move(text), "study_type"); break;
      case Node::condition:
        if (text.empty()) {
          warn("empty_value", "empty <condition> ignored");
        } else {
          study_.conditions.push_back(std::move(text));
        }
        break;
      case Node::intervention_type:
        study_.interventions.back().intervention_type = parse_intervention_type(text);
        break;
      case Node::intervention_name:
        study_.interventions.back().name = std::move(text);
        break;
      case Node::intervention_arm:
        study_.interventions.back().arm_refs.push_back(std::move(text));
        break;
      case Node::intervention:
        if (study_.interventions.back().name.empty()) {
          warn("missing_field", "<intervention> without a name dropped");
          study_.interventions.pop_back();
        }
        break;
      case Node::criteria_text:
        if (!text.empty()) set_once(study_.eligibility.criteria_text, std::move(text), "criteria");
        break;
      case Node::gender: study_.eligibility.sex = parse_sex(text); break;
      case Node::minimum_age: study_.eligibility.minimum_age = age(text, "minimum_age"); break;
      case Node::maximum_age: study_.eligibility.maximum_age = age(text, "maximum_age"); break;
      case Node::healthy_volunteers: {
        std::string v = fold_label(text);
        if (v == "yes" || v == "accepts healthy volunteers") {
          study_.healthy_volunteers = true;
        } else if (v == "no") {
          study_.healthy_volunteers = false;
        } else if (!v.empty()) {
          warn("invalid_value", "healthy_volunteers '" + text + "' not recognized");
        }
        break;
      }
      case Node::arm_group_label: arms_.back().label = std::move(text); break;
      case Node::arm_group_type:
        if (!text.empty()) arms_.back().reported_type = std::move(text);
        break;
      case Node::country:
        if (!text.empty()) study_.countries.push_back(std::move(text));
        break;
      case Node::category_title:
        if (!text.empty()) organ_system_ = std::move(text);
        break;
      case Node::event_sub_title: {
        event_term_ = std::move(text);
        // <counts> may precede <sub_title>; back-fill this event's rows.
        for (std::size_t i = event_first_count_; i < counts_.size(); ++i) {
          if (counts_[i].term.empty()) counts_[i].term = event_term_;
        }
        break;
      }
      default:
        break;
    }
  }

  std::optional<AgeLimit> age(const std::string& text, std::string_view what) {
    try {
      return parse_age(text);
    } catch (const std::invalid_argument& e) {
      warn("invalid_value", std::string(what) + ": " + e.what());
      return std::nullopt;
    }
  }

  const ArmRecord* resolve(const std::string& ref) const {
    for (const auto& arm : study_.arms) {
      if (!arm.group_id.empty() && arm.group_id == ref) return &arm;
    }
    std::string folded = fold_label(ref);
    for (const auto& arm : study_.arms) {
      if (fold_label(arm.label) == folded) return &arm;
    }
    return nullptr;
  }

  ArmRecord* resolve_mut(const std::string& ref) {
    return const_cast<ArmRecord*>(resolve(ref));
  }

  std::variant<ParsedStudy, ParseFailure> finish() {
    if (!nct_id_ || nct_id_->empty()) {
      return ParseFailure{ParseFailure::Kind::missing_nct_id, "no <id_info>/<nct_id> element"};
    }
    study_.nct_id = *nct_id_;
    if (brief_title_) {
      study_.brief_title = *brief_title_;
    } else {
      warn("missing_field", "no <brief_title>");
    }
    if (url_ && !url_->empty()) {
      study_.registry_url = *url_;
    } else {
      study_.registry_url = "https://clinicaltrials.gov/study/" + study_.nct_id;
      warn("derived_value", "no <required_header>/<url>; registry_url derived from nct_id");
    }
    if (status_) study_.status = parse_status(*status_);
    if (phase_) {
      study_.phase = parse_phase(*phase_);
      if (study_.phase == Phase::unknown) warn("invalid_value", "phase '" + *phase_ + "' not recognized");
    }
    if (study_type_) study_.study_type = parse_study_type(*study_type_);

    auto& el = study_.eligibility;
    if (el.minimum_age && el.maximum_age && el.minimum_age->days() > el.maximum_age->days()) {
      el.age_range_inverted = true;
      warn("age_range_inverted", "minimum_age exceeds maximum_age");
    }

    for (std::size_t i = 0; i < arms_.size(); ++i) {
      auto& p = arms_[i];
      ArmRecord arm;
      char ordinal[8];
      std::snprintf(ordinal, sizeof ordinal, "%03zu", i + 1);
      arm.arm_key = study_.nct_id + "_" + ordinal;
      arm.group_id = p.group_id;
      arm.label = p.label;
      arm.reported_type = p.reported_type;
      if (arm.label.empty()) {
        warn("missing_field", "<arm_group> " + std::to_string(i + 1) + " has no label");
        arm.arm_type = ArmType::other;
      } else {
        arm.arm_type = classify_arm(arm.label, p.reported_type);
      }
      study_.arms.push_back(std::move(arm));
    }

    for (const auto& [gid, count] : started_) {
      if (ArmRecord* arm = resolve_mut(gid)) {
        arm->participants_started = count;
      } else {
        warn("unresolved_arm_ref", "participant_flow group '" + gid + "' matches no arm");
      }
    }
    for (auto& b : baselines_) {
      ArmRecord* arm = resolve_mut(b.group_id);
      if (arm == nullptr) {
        warn("unresolved_arm_ref", "baseline group '" + b.group_id + "' matches no arm");
        continue;
      }
      arm->sex_counts = b.sex;
      arm->age_summary = b.age;
      arm->ethnicity_counts = std::move(b.ethnicity);
    }

    for (auto& c : counts_) {
      AeCountRow row;
      row.arm_ref = c.group_id;
      row.reported_term = c.term;
      row.seriousness = c.seriousness;
      row.organ_system_raw = c.organ_system;
      row.participants_at_risk = c.at_risk;
      if (!c.affected) {
        warn("invalid_value", "event '" + c.term + "' for group '" + c.group_id +
                                  "' has no usable subjects_affected; recorded as 0");
      }
      row.participants_affected = c.affected.value_or(0);
      if (c.term.empty()) warn("missing_field", "event for group '" + c.group_id + "' has no sub_title");
      if (const ArmRecord* arm = resolve(c.group_id)) {
        row.arm_key = arm->arm_key;
      } else {
        warn("unresolved_arm_ref", "event '" + c.term + "' references unknown arm '" + c.group_id + "'");
      }
      if (row.participants_at_risk && row.participants_affected > *row.participants_at_risk) {
        row.counts_inconsistent = true;
        warn("counts_inconsistent", "event '" + c.term + "' for group '" + c.group_id +
                                        "' has subjects_affected > subjects_at_risk");
      }
      study_.ae_rows.push_back(std::move(row));
    }

    for (auto& w : warnings_) w.nct_id = study_.nct_id;
    return ParsedStudy{std::move(study_), std::move(warnings_)};
  }

  std::string_view source_;
  XML_Parser parser_;
  std::optional<ParseFailure> fatal_;
  std::vector<Frame> stack_;
  std::vector<std::string> names_;
  int skip_depth_ = 0;

  StudyRecord study_;
  std::vector<IngestWarning> warnings_;
  std::optional<std::string> url_, nct_id_, brief_title_, status_, phase_, study_type_;
  std::vector<PendingArm> arms_;
  std::vector<std::pair<std::string, std::uint64_t>> started_;
  std::vector<PendingBaseline> baselines_;
  std::vector<PendingCount> counts_;
  Seriousness seriousness_ = Seriousness::other;
  std::optional<std::string> organ_system_;
  std::string event_term_;
  std::size_t event_first_count_ = 0;
};

}  // namespace

std::variant<ParsedStudy, ParseFailure> parse_study(std::string_view xml,
                                                    std::string_view source_name) {
  DocumentParser parser(source_name);
  return parser.run(xml);
}

// ---------------------------------------------------------------------------
// Filters and reports

std::string_view to_string(ExclusionReason r) {
  switch (r) {
    case ExclusionReason::results_withheld: return "results_withheld";
    case ExclusionReason::no_eligibility: return "no_eligibility";
    case ExclusionReason::no_conditions: return "no_conditions";
  }
  return "?";
}

std::optional<ExclusionReason> filter_study(const StudyRecord& study) {
  if (study.status == StudyStatus::withheld) return ExclusionReason::results_withheld;
  if (study.eligibility.all_unspecified()) return ExclusionReason::no_eligibility;
  if (study.conditions.empty()) return ExclusionReason::no_conditions;
  return std::nullopt;
}

void ExclusionReport::record(std::optional<ExclusionReason> decision) {
  ++total_seen;
  if (!decision) {
    ++included;
    return;
  }
  switch (*decision) {
    case ExclusionReason::results_withheld: ++excluded_results_withheld; break;
    case ExclusionReason::no_eligibility: ++excluded_no_eligibility; break;
    case ExclusionReason::no_conditions: ++excluded_no_conditions; break;
  }
}

std::string format_exclusion_report(const ExclusionReport& r) {
  std::ostringstream out;
  out << "total_seen=" << r.total_seen << "\n"
      << "excluded_results_withheld=" << r.excluded_results_withheld << "\n"
      << "excluded_no_eligibility=" << r.excluded_no_eligibility << "\n"
      << "excluded_no_conditions=" << r.excluded_no_conditions << "\n"
      << "included=" << r.included << "\n";
  return out.str();
}

ExclusionReport parse_exclusion_report(std::string_view text) {
  ExclusionReport r;
  std::map<std::string, std::uint64_t*> slots{
      {"total_seen", &r.total_seen},
      {"excluded_results_withheld", &r.excluded_results_withheld},
      {"excluded_no_eligibility", &r.excluded_no_eligibility},
      {"excluded_no_conditions", &r.excluded_no_conditions},
      {"included", &r.included}};
  std::istringstream in{std::string(text)};
  std::string line;
  while (std::getline(in, line)) {
    auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    auto it = slots.find(line.substr(0, eq));
    auto v = parse_count(std::string_view(line).substr(eq + 1));
    if (it == slots.end() || !v) throw std::invalid_argument("bad exclusion report line: " + line);
    *it->second = *v;
  }
  return r;
}

// ---------------------------------------------------------------------------
// Archive ingestion

IngestResult ingest_files(const std::vector<std::filesystem::path>& files,
                          const std::vector<std::string>& labels, const IngestConfig& cfg) {
  if (files.size() != labels.size()) throw std::invalid_argument("files/labels size mismatch");

  std::vector<std::size_t> order(files.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (labels[a] != labels[b]) return labels[a] < labels[b];
    return files[a] < files[b];
  });

  struct Outcome {
    std::optional<StudyRecord> study;
    std::vector<IngestWarning> warnings;
  };
  std::vector<Outcome> outcomes(files.size());

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t k = next++; k < order.size(); k = next++) {
      const std::size_t i = order[k];
      Outcome& out = outcomes[k];
      std::string bytes;
      try {
        bytes = read_file(files[i]);
      } catch (const std::exception& e) {
        out.warnings.push_back({labels[i], std::nullopt, "read_error", e.what()});
        continue;
      }
      auto parsed = parse_study(bytes, labels[i]);
      if (auto* failure = std::get_if<ParseFailure>(&parsed)) {
        out.warnings.push_back(
            {labels[i], std::nullopt, std::string(to_string(failure->kind)), failure->message});
        continue;
      }
      auto& ok = std::get<ParsedStudy>(parsed);
      out.study = std::move(ok.study);
      out.warnings = std::move(ok.warnings);
    }
  };
  unsigned threads = std::max(1u, std::min<unsigned>(cfg.threads, static_cast<unsigned>(files.size())));
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
  }

  IngestResult result;
  std::unordered_set<std::string> seen_ids;
  std::vector<StudyRecord> accepted;
  for (std::size_t k = 0; k < outcomes.size(); ++k) {
    Outcome& out = outcomes[k];
    for (auto& w : out.warnings) result.warnings.push_back(std::move(w));
    if (!out.study) continue;
    if (!seen_ids.insert(out.study->nct_id).second) {
      result.warnings.push_back({labels[order[k]], out.study->nct_id, "duplicate_nct_id",
                                 "study already ingested from an earlier file; skipped"});
      continue;
    }
    accepted.push_back(std::move(*out.study));
  }

  std::sort(accepted.begin(), accepted.end(),
            [](const StudyRecord& a, const StudyRecord& b) { return a.nct_id < b.nct_id; });
  for (auto& study : accepted) {
    auto decision = filter_study(study);
    result.report.record(decision);
    result.decisions.push_back({study.nct_id, decision});
    if (!decision) result.studies.push_back(std::move(study));
  }
  return result;
}

IngestResult ingest_archive(const std::filesystem::path& dir, const IngestConfig& cfg) {
  namespace fs = std::filesystem;
  std::error_code ec;
  if (!fs::is_directory(dir, ec)) {
    throw IngestError("input directory '" + dir.string() + "' does not exist or is not a directory");
  }
  std::vector<fs::path> files;
  std::vector<std::string> labels;
  fs::recursive_directory_iterator it(dir, ec), end;
  if (ec) throw IngestError("cannot read input directory '" + dir.string() + "': " + ec.message());
  for (; it != end; it.increment(ec)) {
    if (ec) throw IngestError("cannot read input directory '" + dir.string() + "': " + ec.message());
    if (!it->is_regular_file(ec)) continue;
    std::string ext = lower_ascii(it->path().extension().string());
    if (ext != ".xml") continue;
    files.push_back(it->path());
    labels.push_back(fs::relative(it->path(), dir, ec).generic_string());
  }
  if (ec) throw IngestError("cannot read input directory '" + dir.string() + "': " + ec.message());
  return ingest_files(files, labels, cfg);
}

}  // namespace ctgdb
