#include "ctgdb/normalizer.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <map>
#include <stdexcept>
#include <thread>
#include <unordered_map>

#include "ctgdb/csv.hpp"

namespace ctgdb {

void NormalizerConfig::validate() const {
  if (!(fuzzy_threshold > 0.0) || fuzzy_threshold > 1.0) {
    throw std::invalid_argument("fuzzy_threshold must lie in (0, 1], got " +
                                format_real(fuzzy_threshold));
  }
}

std::size_t min_overlap_for_threshold(std::size_t query_bigrams, double threshold) {
  // dice >= t with c <= |b| gives c >= t|a| / (2 - t). Any positive score
  // needs c >= 1.
  double bound = threshold * static_cast<double>(query_bigrams) / (2.0 - threshold);
  auto c = static_cast<std::size_t>(std::ceil(bound - 1e-9));
  return std::max<std::size_t>(c, 1);
}

namespace {

struct Candidate {
  std::size_t index;
  double score;
};

// Strict "a beats b": higher score, then PT, then lower code (lower index).
bool better(const TermDictionary& dict, const Candidate& a, const Candidate& b) {
  if (a.score != b.score) return a.score > b.score;
  const auto la = dict.entries()[a.index].level;
  const auto lb = dict.entries()[b.index].level;
  if (la != lb) return la == TermLevel::PT;
  return a.index < b.index;
}

std::optional<Candidate> best_fuzzy(const BigramSet& query, const TermDictionary& dict,
                                    const NormalizerConfig& cfg) {
  if (query.empty()) return std::nullopt;
  std::optional<Candidate> best;
  auto consider = [&](std::size_t index, std::size_t common) {
    if (common == 0) return;
    Candidate c{index, dice_from_counts(common, query.size(), dict.bigrams(index).size())};
    if (c.score < cfg.fuzzy_threshold) return;
    if (!best || better(dict, c, *best)) best = c;
  };

  const bool prune_admissible =
      min_overlap_for_threshold(query.size(), cfg.fuzzy_threshold) >= cfg.min_candidate_bigram_overlap;
  if (prune_admissible) {
    std::unordered_map<std::uint32_t, std::uint32_t> overlap;
    for (Bigram b : query) {
      for (std::uint32_t idx : dict.postings(b)) ++overlap[idx];
    }
    for (const auto& [idx, common] : overlap) {
      if (common >= cfg.min_candidate_bigram_overlap) consider(idx, common);
    }
  } else {
    for (std::size_t i = 0; i < dict.size(); ++i) {
      const BigramSet& other = dict.bigrams(i);
      std::size_t common = 0;
      auto qa = query.begin();
      auto ob = other.begin();
      while (qa != query.end() && ob != other.end()) {
        if (*qa < *ob) {
          ++qa;
        } else if (*ob < *qa) {
          ++ob;
        } else {
          ++common;
          ++qa;
          ++ob;
        }
      }
      consider(i, common);
    }
  }
  return best;
}

}  // namespace

TermMapping match_term(std::string_view raw, const TermDictionary& dict,
                       const NormalizerConfig& cfg) {
  TermMapping m;
  m.reported_string = std::string(raw);
  CanonicalText canonical = canonicalize(raw, cfg.strip_grading);
  m.canonical_string = std::move(canonical.text);
  m.stripped_suffix = std::move(canonical.stripped_suffix);
  if (m.canonical_string.empty()) return m;

  auto set_match = [&](std::size_t index, MatchStage stage, double similarity) {
    const TermEntry& e = dict.entries()[index];
    m.matched_code = e.code;
    m.matched_pt_code = dict.pt_of(e.code).code;
    m.stage = stage;
    m.similarity = similarity;
  };

  auto hits = dict.exact(m.canonical_string);
  if (!hits.empty()) {
    std::optional<Candidate> best;
    for (std::uint32_t idx : hits) {
      Candidate c{idx, 1.0};
      if (!best || better(dict, c, *best)) best = c;
    }
    set_match(best->index, MatchStage::exact, 1.0);
    return m;
  }

  if (cfg.enable_fuzzy) {
    if (auto best = best_fuzzy(bigram_set(m.canonical_string), dict, cfg)) {
      set_match(best->index, MatchStage::fuzzy, best->score);
    }
  }
  return m;
}

NormalizedCorpus normalize_corpus(std::span<const WeightedString> strings,
                                  const TermDictionary& dict, const NormalizerConfig& cfg,
                                  unsigned threads) {
  cfg.validate();
  std::map<std::string, std::uint64_t> unique;
  for (const auto& s : strings) unique[s.raw] += s.participants_affected;

  NormalizedCorpus out;
  std::vector<const std::string*> keys;
  keys.reserve(unique.size());
  for (const auto& [raw, weight] : unique) {
    keys.push_back(&raw);
    out.weights.push_back(weight);
  }
  out.mappings.resize(keys.size());

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < keys.size(); i = next++) {
      out.mappings[i] = match_term(*keys[i], dict, cfg);
    }
  };
  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(keys.size())));
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
  }

  std::vector<StageWeight> items;
  items.reserve(out.mappings.size());
  for (std::size_t i = 0; i < out.mappings.size(); ++i) {
    items.push_back({out.mappings[i].stage, out.weights[i]});
  }
  out.coverage = coverage_report(items);
  return out;
}

std::string format_mapping_csv(std::span<const TermMapping> mappings) {
  CsvWriter w({"reported_string", "canonical_string", "matched_code", "matched_pt_code", "stage",
               "similarity", "stripped_suffix"});
  for (const auto& m : mappings) {
    w.add({m.reported_string, m.canonical_string, m.matched_code, m.matched_pt_code,
           std::string(to_string(m.stage)), format_real(m.similarity), m.stripped_suffix});
  }
  return w.text();
}

std::vector<TermMapping> parse_mapping_csv(std::string_view text) {
  CsvDocument doc = parse_csv(text);
  std::string header;
  for (std::size_t i = 0; i < doc.header.size(); ++i) {
    if (i) header.push_back(',');
    header += doc.header[i];
  }
  if (header != kMappingCsvHeader) throw CsvError("unexpected mapping header '" + header + "'", 1);

  std::vector<TermMapping> out;
  out.reserve(doc.rows.size());
  for (std::size_t r = 0; r < doc.rows.size(); ++r) {
    const Row& row = doc.rows[r];
    TermMapping m;
    m.reported_string = row[0].value_or("");
    m.canonical_string = row[1].value_or("");
    m.matched_code = row[2];
    m.matched_pt_code = row[3];
    try {
      m.stage = parse_match_stage(row[4].value_or(""));
      m.similarity = std::stod(row[5].value_or("0"));
    } catch (const std::exception& e) {
      throw CsvError(e.what(), doc.line_of[r]);
    }
    m.stripped_suffix = row[6];
    out.push_back(std::move(m));
  }
  return out;
}

}  // namespace ctgdb
