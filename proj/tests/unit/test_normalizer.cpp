#include <gtest/gtest.h>

#include "ctgdb/normalizer.hpp"
#include "ctgdb/text.hpp"
#include "fuzzy_property.hpp"
#include "oracles.hpp"

using namespace ctgdb;

namespace {

const TermDictionary& bundled() {
  static const TermDictionary d =
      load_dictionary(oracle::source_dir() / "data/vocabulary.synthetic.tsv");
  return d;
}

TermDictionary small_dict() {
  return TermDictionary::from_entries({
      {"10", "Nausea", TermLevel::PT, std::nullopt, std::nullopt, std::nullopt},
      {"20", "Headache", TermLevel::PT, std::nullopt, std::nullopt, std::nullopt},
      {"30", "Head ache", TermLevel::LLT, "20", std::nullopt, std::nullopt},
      {"9", "Dizziness", TermLevel::PT, std::nullopt, std::nullopt, std::nullopt},
      {"11", "dizziness", TermLevel::LLT, "9", std::nullopt, std::nullopt},
  });
}

}  // namespace

TEST(MatchTerm, ExactOnPt) {
  auto m = match_term("Nausea", bundled(), {});
  EXPECT_EQ(m.stage, MatchStage::exact);
  EXPECT_EQ(m.similarity, 1.0);
  EXPECT_EQ(m.matched_code, "90000001");
  EXPECT_EQ(m.matched_pt_code, "90000001");
}

TEST(MatchTerm, MisspellingIsFuzzyAtLowThreshold) {
  NormalizerConfig cfg;
  cfg.fuzzy_threshold = 0.55;
  auto m = match_term("Nausae", bundled(), cfg);
  EXPECT_EQ(m.stage, MatchStage::fuzzy);
  EXPECT_DOUBLE_EQ(m.similarity, 0.6);
  EXPECT_EQ(m.matched_pt_code, "90000001");
  // Default threshold rejects it.
  EXPECT_EQ(match_term("Nausae", bundled(), {}).stage, MatchStage::unmapped);
}

TEST(MatchTerm, NoOverlapIsUnmapped) {
  auto m = match_term("xyzzy frobnication", bundled(), {});
  EXPECT_EQ(m.stage, MatchStage::unmapped);
  EXPECT_FALSE(m.matched_code);
  EXPECT_FALSE(m.matched_pt_code);
  EXPECT_EQ(m.similarity, 0.0);
}

TEST(MatchTerm, PunctuationAndGradeAreExact) {
  auto m = match_term("Nausea G1", bundled(), {});
  EXPECT_EQ(m.stage, MatchStage::exact);
  EXPECT_EQ(m.stripped_suffix, "g1");
  EXPECT_EQ(match_term("Nausea?", bundled(), {}).stage, MatchStage::exact);
}

TEST(MatchTerm, LltResolvesToParent) {
  auto m = match_term("nausea and vomiting", bundled(), {});
  EXPECT_EQ(m.stage, MatchStage::exact);
  EXPECT_EQ(m.matched_code, "90100001");
  EXPECT_EQ(m.matched_pt_code, "90000001");
}

TEST(MatchTerm, ExactTiePrefersPt) {
  auto d = small_dict();
  auto m = match_term("DIZZINESS", d, {});
  EXPECT_EQ(m.matched_code, "9");
}

TEST(MatchTerm, EmptyStringUnmapped) {
  EXPECT_EQ(match_term("", bundled(), {}).stage, MatchStage::unmapped);
  EXPECT_EQ(match_term(" ?? ", bundled(), {}).stage, MatchStage::unmapped);
}

TEST(MatchTerm, NoFuzzyMeansExactOnly) {
  NormalizerConfig cfg;
  cfg.enable_fuzzy = false;
  cfg.fuzzy_threshold = 0.1;
  EXPECT_EQ(match_term("Nausae", bundled(), cfg).stage, MatchStage::unmapped);
  EXPECT_EQ(match_term("Nausea", bundled(), cfg).stage, MatchStage::exact);
}

TEST(MatchTerm, ThresholdMonotone) {
  oracle::TermGenerator gen(7);
  const double ts[] = {0.3, 0.5, 0.7, 0.85, 0.95, 1.0};
  for (int i = 0; i < 300; ++i) {
    std::string raw = gen.variant(std::string(bundled().entries()[i % bundled().size()].text));
    bool was_unmapped = false;
    for (double t : ts) {
      NormalizerConfig cfg;
      cfg.fuzzy_threshold = t;
      bool unmapped = match_term(raw, bundled(), cfg).stage == MatchStage::unmapped;
      EXPECT_FALSE(was_unmapped && !unmapped) << raw << " at " << t;
      was_unmapped = unmapped;
    }
  }
}

TEST(MatchTerm, OracleEquivalenceSmall) {
  fuzzy_property::Outcome out;
  for (std::uint64_t seed = 1; seed <= 150; ++seed) fuzzy_property::run_case(seed, 40, 40, out);
  EXPECT_EQ(out.mismatches, 0u) << out.first_mismatch;
  EXPECT_GT(out.queries, 1000u);
}

TEST(MatchTerm, OracleEquivalenceLarge) {
  fuzzy_property::Outcome out;
  for (std::uint64_t seed = 900; seed < 903; ++seed) fuzzy_property::run_case(seed, 500, 500, out);
  EXPECT_EQ(out.mismatches, 0u) << out.first_mismatch;
}

TEST(MinOverlap, NeverExceedsTrueOverlap) {
  // For every (query size, entry size, overlap) that clears the threshold,
  // the bound must be <= the overlap.
  const double ts[] = {0.1, 0.33, 0.5, 0.6, 0.85, 0.9, 1.0};
  for (double t : ts) {
    for (std::size_t q = 1; q <= 30; ++q) {
      std::size_t bound = min_overlap_for_threshold(q, t);
      for (std::size_t e = 1; e <= 60; ++e) {
        for (std::size_t c = 0; c <= std::min(q, e); ++c) {
          double s = 2.0 * static_cast<double>(c) / static_cast<double>(q + e);
          if (s >= t) {
            EXPECT_LE(bound, c) << "t " << t << " q " << q << " e " << e;
          }
        }
      }
    }
  }
}

TEST(NormalizerConfig, Validate) {
  NormalizerConfig c;
  EXPECT_NO_THROW(c.validate());
  c.fuzzy_threshold = 1.0;
  EXPECT_NO_THROW(c.validate());
  c.fuzzy_threshold = 0.0;
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c.fuzzy_threshold = 1.01;
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c.fuzzy_threshold = -0.2;
  EXPECT_THROW(c.validate(), std::invalid_argument);
}

TEST(NormalizeCorpus, ThreeCategoriesEvenly) {
  NormalizerConfig cfg;
  cfg.fuzzy_threshold = 0.55;
  std::vector<WeightedString> s = {{"Nausea", 10}, {"Nausae", 10}, {"xyzzy frobnication", 10}};
  auto r = normalize_corpus(s, bundled(), cfg);
  ASSERT_EQ(r.mappings.size(), 3u);
  EXPECT_EQ(r.coverage.unique_exact, 1u);
  EXPECT_EQ(r.coverage.unique_fuzzy, 1u);
  EXPECT_EQ(r.coverage.unique_unmapped, 1u);
  for (auto st : {MatchStage::exact, MatchStage::fuzzy, MatchStage::unmapped}) {
    EXPECT_NEAR(r.coverage.unique_pct(st), 100.0 / 3.0, 1e-9);
    EXPECT_NEAR(r.coverage.weighted_pct(st), 100.0 / 3.0, 1e-9);
  }
}

TEST(NormalizeCorpus, Empty) {
  auto r = normalize_corpus({}, bundled(), {});
  EXPECT_TRUE(r.mappings.empty());
  EXPECT_EQ(r.coverage, CoverageReport{});
  EXPECT_EQ(r.coverage.unique_pct(MatchStage::exact), 0.0);
  EXPECT_EQ(r.coverage.weighted_mapped_pct(), 0.0);
}

TEST(NormalizeCorpus, WeightedShare) {
  std::vector<WeightedString> s = {{"Headache", 90}, {"xyzzy", 6}, {"frobnication", 4}};
  auto r = normalize_corpus(s, bundled(), {});
  EXPECT_NEAR(r.coverage.weighted_pct(MatchStage::exact), 90.0, 1e-12);
  EXPECT_NEAR(r.coverage.unique_pct(MatchStage::exact), 100.0 / 3.0, 1e-12);
}

TEST(NormalizeCorpus, DuplicatesMergeAndSort) {
  std::vector<WeightedString> s = {{"b", 1}, {"Nausea", 4}, {"b", 2}, {"Nausea", 5}};
  auto r = normalize_corpus(s, bundled(), {});
  ASSERT_EQ(r.mappings.size(), 2u);
  EXPECT_EQ(r.mappings[0].reported_string, "Nausea");
  EXPECT_EQ(r.weights[0], 9u);
  EXPECT_EQ(r.mappings[1].reported_string, "b");
  EXPECT_EQ(r.weights[1], 3u);
  EXPECT_EQ(r.coverage.weighted_total(), 12u);
}

TEST(NormalizeCorpus, ThreadCountDoesNotMatter) {
  oracle::TermGenerator gen(99);
  std::vector<WeightedString> s;
  for (int i = 0; i < 400; ++i) {
    s.push_back({gen.variant(std::string(bundled().entries()[i % bundled().size()].text)),
                 static_cast<std::uint64_t>(i % 13)});
  }
  auto one = normalize_corpus(s, bundled(), {}, 1);
  auto four = normalize_corpus(s, bundled(), {}, 4);
  EXPECT_EQ(one.mappings, four.mappings);
  EXPECT_EQ(one.weights, four.weights);
  EXPECT_EQ(one.coverage, four.coverage);
}

TEST(NormalizeCorpus, StageDominance) {
  // Exact strings never appear as fuzzy, whatever else is in the corpus.
  NormalizerConfig cfg;
  cfg.fuzzy_threshold = 0.3;
  std::vector<WeightedString> s;
  for (const auto& e : bundled().entries()) s.push_back({e.text, 1});
  s.push_back({"Nausae", 1});
  auto r = normalize_corpus(s, bundled(), cfg);
  for (const auto& m : r.mappings) {
    if (m.reported_string != "Nausae") {
      EXPECT_EQ(m.stage, MatchStage::exact) << m.reported_string;
    }
  }
}

TEST(MappingCsv, RoundTrip) {
  NormalizerConfig cfg;
  cfg.fuzzy_threshold = 0.55;
  std::vector<WeightedString> s = {{"Nausea G2", 1}, {"Nausae", 1}, {"x, \"quoted\"", 1}, {"", 1}};
  auto r = normalize_corpus(s, bundled(), cfg);
  std::string csv = format_mapping_csv(r.mappings);
  EXPECT_EQ(csv.substr(0, kMappingCsvHeader.size()), kMappingCsvHeader);
  auto back = parse_mapping_csv(csv);
  ASSERT_EQ(back.size(), r.mappings.size());
  for (std::size_t i = 0; i < back.size(); ++i) {
    EXPECT_EQ(back[i].reported_string, r.mappings[i].reported_string);
    EXPECT_EQ(back[i].matched_code, r.mappings[i].matched_code);
    EXPECT_EQ(back[i].stage, r.mappings[i].stage);
    EXPECT_EQ(back[i].stripped_suffix, r.mappings[i].stripped_suffix);
    EXPECT_NEAR(back[i].similarity, r.mappings[i].similarity, 5e-7);
  }
  EXPECT_NE(csv.find(",fuzzy,0.600000,"), std::string::npos);
}

TEST(Coverage, PercentagesSumTo100) {
  std::mt19937_64 rng(3);
  std::uniform_int_distribution<int> stage(0, 2);
  std::uniform_int_distribution<std::uint64_t> w(0, 100000);
  for (int k = 0; k < 50; ++k) {
    std::vector<StageWeight> items;
    for (int i = 0; i < 1 + k * 3; ++i) {
      items.push_back({static_cast<MatchStage>(stage(rng)), w(rng) + 1});
    }
    auto r = coverage_report(items);
    double u = 0, wt = 0;
    for (auto st : {MatchStage::exact, MatchStage::fuzzy, MatchStage::unmapped}) {
      u += r.unique_pct(st);
      wt += r.weighted_pct(st);
    }
    EXPECT_NEAR(u, 100.0, 1e-9);
    EXPECT_NEAR(wt, 100.0, 1e-9);
  }
}

TEST(Coverage, TableOneArithmetic) {
  CoverageReport r;
  r.unique_exact = 25407;
  r.unique_fuzzy = 56340;
  r.unique_unmapped = 56285;
  r.weighted_exact = 24382112;
  r.weighted_fuzzy = 1717553;
  r.weighted_unmapped = 1370032;
  EXPECT_EQ(r.unique_total(), 138032u);
  EXPECT_EQ(r.weighted_total(), 27469697u);
  EXPECT_NEAR(r.unique_pct(MatchStage::exact), 18.41, 0.01);
  EXPECT_NEAR(r.unique_pct(MatchStage::fuzzy), 40.82, 0.01);
  EXPECT_NEAR(r.unique_pct(MatchStage::unmapped), 40.78, 0.01);
  EXPECT_NEAR(r.unique_mapped_pct(), 59.22, 0.01);
  EXPECT_NEAR(r.weighted_pct(MatchStage::exact), 88.76, 0.01);
  EXPECT_NEAR(r.weighted_pct(MatchStage::fuzzy), 6.25, 0.01);
  EXPECT_NEAR(r.weighted_pct(MatchStage::unmapped), 4.99, 0.01);
  EXPECT_NEAR(r.weighted_mapped_pct(), 95.01, 0.01);
  std::string table = format_coverage_table(r, "Terms");
  EXPECT_NE(table.find("18.41"), std::string::npos);
  EXPECT_NE(table.find("95.01"), std::string::npos);
}

TEST(Coverage, Csv) {
  std::vector<StageWeight> items = {{MatchStage::exact, 3}, {MatchStage::unmapped, 1}};
  std::string csv = format_coverage_csv(coverage_report(items));
  EXPECT_EQ(csv.substr(0, csv.find('\n')),
            "category,unique_count,unique_pct,weighted_count,weighted_pct");
  EXPECT_NE(csv.find("exact,1,50.000000,3,75.000000"), std::string::npos) << csv;
}
