// Randomized comparison of the arm statistics against the oracle formulas.
#pragma once

#include <sstream>
#include <string>

#include "ctgdb/analytics.hpp"
#include "oracles.hpp"

namespace stats_property {

struct Outcome {
  std::size_t inputs = 0;
  std::size_t checks = 0;
  std::size_t mismatches = 0;
  std::size_t corrected_cases = 0;
  std::string first_mismatch;
};

inline void note(Outcome& out, bool ok, const std::string& what) {
  ++out.checks;
  if (ok) return;
  if (out.mismatches == 0) out.first_mismatch = what;
  ++out.mismatches;
}

// One input: a proportion, a placebo pool and an odds ratio, all drawn from
// the same generator. Small counts make zero cells common.
inline void run_input(std::mt19937_64& rng, Outcome& out) {
  std::uniform_int_distribution<std::uint64_t> small(1, 40), big(1, 5000);
  std::bernoulli_distribution coin(0.5);
  auto draw_n = [&] { return coin(rng) ? small(rng) : big(rng); };
  auto draw_events = [&](std::uint64_t n) {
    std::uniform_int_distribution<std::uint64_t> e(0, n);
    std::uniform_int_distribution<int> edge(0, 5);
    int k = edge(rng);
    if (k == 0) return std::uint64_t{0};
    if (k == 1) return n;
    return e(rng);
  };

  std::uint64_t n = draw_n(), e = draw_events(n);
  double p = ctgdb::arm_proportion(e, n);
  note(out, oracle::close(p, oracle::proportion(e, n)),
       "arm_proportion(" + std::to_string(e) + ", " + std::to_string(n) + ")");

  std::uniform_int_distribution<int> pool_size(1, 25);
  std::vector<ctgdb::ArmEventStat> arms;
  std::vector<double> ps;
  std::uint64_t sum_e = 0, sum_n = 0;
  for (int i = pool_size(rng); i > 0; --i) {
    ctgdb::ArmEventStat s;
    s.arm_key = "A" + std::to_string(i);
    s.is_placebo = true;
    s.arm_type = ctgdb::ArmType::placebo;
    s.n_started = draw_n();
    s.n_ae = draw_events(s.n_started);
    s.p_arm = ctgdb::arm_proportion(s.n_ae, s.n_started);
    ps.push_back(oracle::proportion(s.n_ae, s.n_started));
    sum_e += s.n_ae;
    sum_n += s.n_started;
    arms.push_back(s);
    if (coin(rng)) {
      // Non-placebo noise that must be ignored.
      auto other = s;
      other.arm_key += "x";
      other.is_placebo = false;
      other.arm_type = ctgdb::ArmType::active;
      other.p_arm = 0.99;
      arms.push_back(other);
    }
  }
  auto ref = ctgdb::placebo_reference(arms);
  double want_q75 = oracle::percentile(ps, 0.75);
  double want_max = *std::max_element(ps.begin(), ps.end());
  std::ostringstream pool;
  for (double x : ps) pool << x << " ";
  note(out, oracle::close(ref.q75, want_q75), "q75 over {" + pool.str() + "}");
  note(out, ref.max_p == want_max, "max over {" + pool.str() + "}");
  note(out, ref.pooled_n_ae == sum_e && ref.pooled_n_started == sum_n, "pooled counts");
  note(out, ref.q75 <= ref.max_p, "q75 <= max");

  std::uint64_t an = draw_n(), bn = draw_n();
  std::uint64_t a = draw_events(an), b = draw_events(bn);
  auto got = ctgdb::odds_ratio(a, an, b, bn);
  auto want = oracle::odds(static_cast<double>(a), static_cast<double>(an), static_cast<double>(b),
                           static_cast<double>(bn));
  out.corrected_cases += want.corrected;
  note(out, got.corrected == want.corrected && oracle::close(got.value, want.value),
       "odds_ratio(" + std::to_string(a) + ", " + std::to_string(an) + ", " + std::to_string(b) +
           ", " + std::to_string(bn) + ")");
  ++out.inputs;
}

}  // namespace stats_property
