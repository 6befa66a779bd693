#include "ctgdb/schema.hpp"

#include <algorithm>
#include <set>

namespace ctgdb {

const Column* TableSchema::column(std::string_view n) const {
  for (const auto& c : columns) {
    if (c.name == n) return &c;
  }
  return nullptr;
}

std::size_t TableSchema::column_index(std::string_view n) const {
  for (std::size_t i = 0; i < columns.size(); ++i) {
    if (columns[i].name == n) return i;
  }
  throw SchemaError("table " + name + " has no column " + std::string(n));
}

std::vector<std::string> TableSchema::column_names() const {
  std::vector<std::string> out;
  out.reserve(columns.size());
  for (const auto& c : columns) out.push_back(c.name);
  return out;
}

void validate_schemas(std::span<const TableSchema> schemas) {
  std::set<std::string> declared;
  for (const auto& t : schemas) {
    if (t.name.empty()) throw SchemaError("table with empty name");
    if (declared.count(t.name)) throw SchemaError("table " + t.name + " declared twice");
    std::set<std::string> cols;
    for (const auto& c : t.columns) {
      if (!cols.insert(c.name).second) throw SchemaError(t.name + ": duplicate column " + c.name);
      if (c.type.kind == ColumnKind::enumeration && c.type.values.empty()) {
        throw SchemaError(t.name + "." + c.name + ": enumeration without values");
      }
    }
    if (t.primary_key.empty()) throw SchemaError(t.name + ": no primary key");
    for (const auto& k : t.primary_key) {
      const Column* c = t.column(k);
      if (c == nullptr) throw SchemaError(t.name + ": primary key column " + k + " does not exist");
      if (c->nullable) throw SchemaError(t.name + ": primary key column " + k + " is nullable");
    }
    for (const auto& fk : t.foreign_keys) {
      if (fk.columns.empty() || fk.columns.size() != fk.ref_columns.size()) {
        throw SchemaError(t.name + ": malformed foreign key to " + fk.table);
      }
      for (const auto& c : fk.columns) {
        if (t.column(c) == nullptr) {
          throw SchemaError(t.name + ": foreign key column " + c + " does not exist");
        }
      }
      const TableSchema* target = nullptr;
      if (fk.table == t.name) {
        target = &t;
      } else if (declared.count(fk.table)) {
        for (const auto& other : schemas) {
          if (other.name == fk.table) target = &other;
        }
      }
      if (target == nullptr) {
        throw SchemaError(t.name + ": foreign key references undeclared table " + fk.table);
      }
      for (const auto& rc : fk.ref_columns) {
        if (target->column(rc) == nullptr) {
          throw SchemaError(t.name + ": foreign key references missing column " + fk.table + "." + rc);
        }
      }
      if (fk.ref_columns != target->primary_key) {
        throw SchemaError(t.name + ": foreign key must reference the primary key of " + fk.table);
      }
    }
    declared.insert(t.name);
  }
}

namespace {

ColumnType id() { return {ColumnKind::identifier, {}}; }
ColumnType txt() { return {ColumnKind::text, {}}; }
ColumnType integer() { return {ColumnKind::integer, {}}; }
ColumnType real() { return {ColumnKind::real, {}}; }
ColumnType boolean() { return {ColumnKind::boolean, {}}; }
ColumnType enumeration(std::vector<std::string> values) {
  return {ColumnKind::enumeration, std::move(values)};
}

Column req(std::string name, ColumnType type) { return {std::move(name), std::move(type), false}; }
Column opt(std::string name, ColumnType type) { return {std::move(name), std::move(type), true}; }

ForeignKey fk(std::string column, std::string table, std::string ref) {
  return {{std::move(column)}, std::move(table), {std::move(ref)}};
}

std::vector<TableSchema> build_schemas() {
  const std::vector<std::string> stages{"exact", "fuzzy", "unmapped"};
  std::vector<TableSchema> s;

  s.push_back({"clinical_trial",
               {req("nct_id", id()),
                req("brief_title", txt()),
                opt("official_title", txt()),
                opt("summary", txt()),
                req("registry_url", txt()),
                req("status", enumeration({"recruiting", "completed", "withdrawn", "withheld", "other"})),
                req("phase", enumeration({"early_phase1", "phase1", "phase1_2", "phase2", "phase2_3",
                                          "phase3", "phase4", "not_applicable", "unknown"})),
                req("study_type", enumeration({"interventional", "observational", "expanded_access", "other"})),
                opt("healthy_volunteers", boolean()),
                opt("minimum_age_days", real()),
                opt("maximum_age_days", real()),
                req("sex_eligibility", enumeration({"all", "female", "male", "unspecified"})),
                opt("criteria_text", txt()),
                req("age_range_inverted", boolean()),
                opt("countries", txt())},
               {"nct_id"},
               {}});

  s.push_back({"term_dictionary",
               {req("code", id()),
                req("text", txt()),
                req("level", enumeration({"PT", "LLT"})),
                opt("parent_pt_code", id()),
                opt("soc_code", id()),
                opt("umls_cui", id())},
               {"code"},
               {fk("parent_pt_code", "term_dictionary", "code")}});

  s.push_back({"term_mapping",
               {req("reported_string", id()),
                req("canonical_string", txt()),
                opt("matched_code", id()),
                opt("matched_pt_code", id()),
                req("stage", enumeration(stages)),
                req("similarity", real()),
                opt("stripped_suffix", txt())},
               {"reported_string"},
               {fk("matched_code", "term_dictionary", "code"),
                fk("matched_pt_code", "term_dictionary", "code")}});

  s.push_back({"ethnicity_harmonization",
               {req("raw_value", id()),
                req("harmonized_category", enumeration({"hispanic_or_latino", "not_hispanic_or_latino",
                                                        "unknown_or_not_reported", "unharmonized"}))},
               {"raw_value"},
               {}});

  s.push_back({"ct_conditions",
               {req("nct_id", id()),
                req("ordinal", integer()),
                req("condition_raw", txt()),
                req("canonical_string", txt()),
                opt("matched_code", id()),
                opt("matched_pt_code", id()),
                req("stage", enumeration(stages)),
                req("similarity", real())},
               {"nct_id", "ordinal"},
               {fk("nct_id", "clinical_trial", "nct_id"), fk("matched_code", "term_dictionary", "code"),
                fk("matched_pt_code", "term_dictionary", "code")}});

  s.push_back({"ct_interventions",
               {req("nct_id", id()),
                req("ordinal", integer()),
                req("intervention_type",
                    enumeration({"drug", "biological", "device", "procedure", "behavioral", "other"})),
                req("name", txt()),
                opt("arm_labels", txt())},
               {"nct_id", "ordinal"},
               {fk("nct_id", "clinical_trial", "nct_id")}});

  s.push_back({"ct_arms",
               {req("arm_key", id()),
                req("nct_id", id()),
                req("ordinal", integer()),
                opt("group_id", id()),
                req("label", txt()),
                opt("reported_type", txt()),
                req("arm_type",
                    enumeration({"placebo", "active", "comparator", "sham", "no_intervention", "other"})),
                opt("participants_started", integer())},
               {"arm_key"},
               {fk("nct_id", "clinical_trial", "nct_id")}});

  s.push_back({"ct_arm_demographics",
               {req("arm_key", id()),
                req("ordinal", integer()),
                req("measure", enumeration({"sex_female", "sex_male", "age_mean", "age_sd", "age_median",
                                            "ethnicity"})),
                opt("ethnicity_raw", id()),
                opt("ethnicity_category", enumeration({"hispanic_or_latino", "not_hispanic_or_latino",
                                                       "unknown_or_not_reported", "unharmonized"})),
                req("value", real())},
               {"arm_key", "ordinal"},
               {fk("arm_key", "ct_arms", "arm_key"),
                fk("ethnicity_raw", "ethnicity_harmonization", "raw_value")}});

  s.push_back({"ct_ae_counts",
               {req("nct_id", id()),
                req("ordinal", integer()),
                opt("arm_key", id()),
                req("arm_ref", txt()),
                req("arm_resolved", boolean()),
                opt("reported_term", id()),
                opt("matched_pt_code", id()),
                req("seriousness", enumeration({"serious", "other"})),
                req("participants_affected", integer()),
                opt("participants_at_risk", integer()),
                opt("participants_started", integer()),
                opt("organ_system_raw", txt()),
                req("counts_inconsistent", boolean())},
               {"nct_id", "ordinal"},
               {fk("nct_id", "clinical_trial", "nct_id"), fk("arm_key", "ct_arms", "arm_key"),
                fk("reported_term", "term_mapping", "reported_string"),
                fk("matched_pt_code", "term_dictionary", "code")}});

  validate_schemas(s);
  return s;
}

std::string sql_string(std::string_view s) {
  std::string out = "'";
  for (char c : s) {
    if (c == '\'') out.push_back('\'');
    out.push_back(c);
  }
  out.push_back('\'');
  return out;
}

}  // namespace

const std::vector<TableSchema>& ctgdb_schemas() {
  static const std::vector<TableSchema> schemas = build_schemas();
  return schemas;
}

const TableSchema& schema_for(std::string_view table) {
  for (const auto& s : ctgdb_schemas()) {
    if (s.name == table) return s;
  }
  throw SchemaError("unknown table " + std::string(table));
}

std::string_view to_string(Dialect d) { return d == Dialect::mysql ? "mysql" : "postgresql"; }

Dialect parse_dialect(std::string_view name) {
  if (name == "mysql" || name == "dialect_a") return Dialect::mysql;
  if (name == "postgresql" || name == "postgres" || name == "dialect_b") return Dialect::postgresql;
  throw UnknownDialectError("unknown SQL dialect '" + std::string(name) +
                            "' (expected mysql or postgresql)");
}

std::string type_spelling(Dialect d, const ColumnType& type) {
  const bool my = d == Dialect::mysql;
  switch (type.kind) {
    case ColumnKind::identifier: return "VARCHAR(255)";
    case ColumnKind::text: return my ? "LONGTEXT" : "TEXT";
    case ColumnKind::integer: return "BIGINT";
    case ColumnKind::real: return my ? "DOUBLE" : "DOUBLE PRECISION";
    case ColumnKind::boolean: return my ? "TINYINT(1)" : "BOOLEAN";
    case ColumnKind::enumeration: return "VARCHAR(64)";
  }
  return "TEXT";
}

std::string quote_identifier(Dialect d, std::string_view name) {
  const char q = d == Dialect::mysql ? '`' : '"';
  std::string out(1, q);
  for (char c : name) {
    if (c == q) out.push_back(q);
    out.push_back(c);
  }
  out.push_back(q);
  return out;
}

std::string generate_ddl(Dialect d, std::span<const TableSchema> schemas) {
  validate_schemas(schemas);
  auto q = [d](std::string_view n) { return quote_identifier(d, n); };
  auto list = [&](const std::vector<std::string>& cols) {
    std::string out;
    for (std::size_t i = 0; i < cols.size(); ++i) {
      if (i) out += ", ";
      out += q(cols[i]);
    }
    return out;
  };

  std::string out = "-- ctgdb schema (" + std::string(to_string(d)) + ")\n\n";
  for (auto it = schemas.rbegin(); it != schemas.rend(); ++it) {
    out += "DROP TABLE IF EXISTS " + q(it->name) + ";\n";
  }
  for (const auto& t : schemas) {
    out += "\nCREATE TABLE " + q(t.name) + " (\n";
    std::vector<std::string> lines;
    for (const auto& c : t.columns) {
      std::string line = "  " + q(c.name) + " " + type_spelling(d, c.type);
      if (!c.nullable) line += " NOT NULL";
      if (c.type.kind == ColumnKind::enumeration) {
        line += " CHECK (" + q(c.name) + " IN (";
        for (std::size_t i = 0; i < c.type.values.size(); ++i) {
          if (i) line += ", ";
          line += sql_string(c.type.values[i]);
        }
        line += "))";
      }
      lines.push_back(std::move(line));
    }
    lines.push_back("  PRIMARY KEY (" + list(t.primary_key) + ")");
    for (std::size_t i = 0; i < t.foreign_keys.size(); ++i) {
      const auto& f = t.foreign_keys[i];
      lines.push_back("  CONSTRAINT " + q("fk_" + t.name + "_" + std::to_string(i + 1)) +
                      " FOREIGN KEY (" + list(f.columns) + ") REFERENCES " + q(f.table) + " (" +
                      list(f.ref_columns) + ")");
    }
    for (std::size_t i = 0; i < lines.size(); ++i) {
      out += lines[i];
      out += i + 1 < lines.size() ? ",\n" : "\n";
    }
    out += ");\n";
  }
  return out;
}

}  // namespace ctgdb
