#pragma once

// The conditional-sampling distribution tester.
//
// A run draws T random query sets up front (for each set: pick j uniformly
// from {1, ..., j_range_max}, set r = 2^j, include each symbol independently
// with probability 1/r, redrawing until the set is nonempty), registers them
// with a non-adaptive conditional oracle for each distribution, seals both
// sessions, and only then draws m outcomes per set per oracle. A pair is
// declared Far iff some set exposes an empirical conditional gap of at least
// eps_prime at some symbol. All T*m draws per oracle are committed regardless
// of where a witness appears, so the per-oracle query count is exactly T*m.

#include <bit>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "anaconda/distribution.hpp"
#include "anaconda/estimate.hpp"
#include "anaconda/oracle.hpp"

namespace anaconda {

inline int log2_ceil(symbol_t n) {
  if (n < 2) throw error("log2_ceil: n must be at least 2");
  return std::bit_width(static_cast<std::uint32_t>(n - 1));
}

// ceil() that forgives sub-1e-9 floating-point overshoot past an integer,
// so constants like 1e-4 * 2^20 produce the intended count.
inline std::uint64_t ceil_count(double x) {
  if (!(x > 0.0)) throw error("ceil_count: value must be positive");
  const double nearest = std::round(x);
  if (std::abs(x - nearest) <= 1e-9 + 1e-12 * x && nearest >= 1.0)
    return static_cast<std::uint64_t>(nearest);
  return static_cast<std::uint64_t>(std::ceil(x));
}

struct Constants {
  double c_T = 4.0;
  double c_m = 16.0;
  double c_eps = 0.125;
  double c_b = 1.0;
};

struct AnacondaConfig {
  std::uint64_t T = 0;
  std::uint64_t m = 0;
  double eps_prime = 0.0;
  int j_range_max = 0;
  Constants constants;
  std::uint64_t seed = 0;

  void validate() const {
    if (T < 1) throw error("AnacondaConfig: T must be at least 1");
    if (m < 1) throw error("AnacondaConfig: m must be at least 1");
    if (!(eps_prime > 0.0) || !(eps_prime < 1.0))
      throw error("AnacondaConfig: eps_prime must be in (0, 1)");
    if (j_range_max < 1) throw error("AnacondaConfig: j_range_max must be at least 1");
  }
};

// T = ceil(c_T log n), m = ceil(c_m max(1, log log n) / eps^2),
// eps_prime = c_eps * eps, with log = log2 and ceil(log2 n) for the range
// counts.
inline AnacondaConfig uniformity_config(symbol_t n, double eps, const Constants& c,
                                        std::uint64_t seed) {
  if (n < 2) throw error("uniformity_config: n must be at least 2");
  if (!(eps > 0.0) || eps > 1.0) throw error("uniformity_config: eps must be in (0, 1]");
  const int L = log2_ceil(n);
  AnacondaConfig cfg;
  cfg.T = ceil_count(c.c_T * L);
  cfg.m = ceil_count(c.c_m * std::max(1.0, std::log2(static_cast<double>(L))) / (eps * eps));
  cfg.eps_prime = c.c_eps * eps;
  cfg.j_range_max = 2 * L;
  cfg.constants = c;
  cfg.seed = seed;
  cfg.validate();
  return cfg;
}

// T = ceil(c_T log^6 n), m = ceil(c_m log^6 n / eps^2),
// eps_prime = c_eps * eps / log^3 n.
inline AnacondaConfig equivalence_config(symbol_t n, double eps, const Constants& c,
                                         std::uint64_t seed) {
  if (n < 2) throw error("equivalence_config: n must be at least 2");
  if (!(eps > 0.0) || eps > 1.0) throw error("equivalence_config: eps must be in (0, 1]");
  const double L = static_cast<double>(log2_ceil(n));
  const double L3 = L * L * L;
  AnacondaConfig cfg;
  cfg.T = ceil_count(c.c_T * L3 * L3);
  cfg.m = ceil_count(c.c_m * L3 * L3 / (eps * eps));
  cfg.eps_prime = c.c_eps * eps / L3;
  cfg.j_range_max = 2 * log2_ceil(n);
  cfg.constants = c;
  cfg.seed = seed;
  cfg.validate();
  return cfg;
}

// Independent inclusion with probability p over {1, ..., n}; geometric
// skip-sampling keeps sparse draws cheap.
inline std::vector<symbol_t> sample_inclusion(symbol_t n, double p, Rng& rng) {
  std::vector<symbol_t> out;
  if (p > 1.0 / 16.0) {
    for (symbol_t i = 1; i <= n; ++i) {
      if (rng.bernoulli(p)) out.push_back(i);
    }
  } else {
    std::uint64_t i = 0;
    while (true) {
      i += 1 + rng.geometric_skips(p);
      if (i > n) break;
      out.push_back(static_cast<symbol_t>(i));
    }
  }
  return out;
}

struct PlannedSet {
  int j;
  std::uint64_t r;
  QuerySet set;
};

inline std::vector<PlannedSet> plan_sets(symbol_t n, std::uint64_t T, int j_range_max, Rng& rng) {
  if (n < 2) throw error("plan_sets: n must be at least 2");
  if (T < 1) throw error("plan_sets: T must be at least 1");
  if (j_range_max < 1) throw error("plan_sets: j_range_max must be at least 1");
  std::vector<PlannedSet> plans;
  plans.reserve(T);
  for (std::uint64_t t = 0; t < T; ++t) {
    const int j = 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(j_range_max)));
    const double p = std::ldexp(1.0, -j);
    std::vector<symbol_t> members;
    do {
      members = sample_inclusion(n, p, rng);
    } while (members.empty());  // conditioning on an empty set is undefined
    plans.push_back({j, std::uint64_t{1} << j, QuerySet(std::move(members))});
  }
  return plans;
}

enum class Outcome { Equal, Far };

inline const char* to_string(Outcome o) { return o == Outcome::Equal ? "equal" : "far"; }

struct Witness {
  std::uint64_t iteration;  // 1-based round index
  std::uint64_t set_size;
  symbol_t index;
  double gap;
};

struct Verdict {
  Outcome outcome;
  std::optional<Witness> witness;

  static Verdict equal() { return {Outcome::Equal, std::nullopt}; }
  static Verdict far(Witness w) { return {Outcome::Far, w}; }
};

struct RunResult {
  Verdict verdict = Verdict::equal();
  std::uint64_t queries_p = 0;
  std::uint64_t queries_q = 0;
};

inline RunResult anaconda_run(const DiscreteDistribution& p, const DiscreteDistribution& q,
                              const AnacondaConfig& cfg) {
  check_same_domain(p, q, "anaconda_run");
  cfg.validate();

  Rng planner(derive_seed(cfg.seed, Stream::Planner));
  const std::vector<PlannedSet> plans = plan_sets(p.n(), cfg.T, cfg.j_range_max, planner);

  NacondSession oracle_p(p, derive_seed(cfg.seed, Stream::OracleP));
  NacondSession oracle_q(q, derive_seed(cfg.seed, Stream::OracleQ));
  for (const PlannedSet& plan : plans) {
    oracle_p.register_set(plan.set);
    oracle_q.register_set(plan.set);
  }
  oracle_p.seal();
  oracle_q.seal();

  // every draw is committed up front; outcomes are examined only afterwards
  std::vector<std::vector<std::uint64_t>> counts_p(cfg.T), counts_q(cfg.T);
  for (std::uint64_t t = 0; t < cfg.T; ++t) {
    const QuerySet& s = plans[t].set;
    counts_p[t].assign(s.size(), 0);
    counts_q[t].assign(s.size(), 0);
    for (std::uint64_t k = 0; k < cfg.m; ++k)
      ++counts_p[t][s.position_of(oracle_p.draw(t))];
    for (std::uint64_t k = 0; k < cfg.m; ++k)
      ++counts_q[t][s.position_of(oracle_q.draw(t))];
  }

  const std::uint64_t expected = cfg.T * cfg.m;
  if (oracle_p.ledger().total != expected || oracle_q.ledger().total != expected)
    throw error("anaconda_run: internal ledger mismatch");

  RunResult result;
  result.queries_p = oracle_p.ledger().total;
  result.queries_q = oracle_q.ledger().total;
  for (std::uint64_t t = 0; t < cfg.T; ++t) {
    EmpiricalDistribution hat_p(plans[t].set, counts_p[t]);
    EmpiricalDistribution hat_q(plans[t].set, counts_q[t]);
    const SymbolValue gap = max_discrepancy(hat_p, hat_q);
    if (gap.value >= cfg.eps_prime) {
      result.verdict = Verdict::far({t + 1, plans[t].set.size(), gap.index, gap.value});
      return result;
    }
  }
  result.verdict = Verdict::equal();
  return result;
}

// Identity testing against an explicitly known q that is pointwise within
// 1/(100 n) of uniform: run the two-oracle tester (q simulated) boosted by
// majority vote over R = ceil(c_b log2(1/delta)) runs (forced odd).
inline RunResult near_uniform_identity(const DiscreteDistribution& p,
                                       const DiscreteDistribution& q, double eps, double delta,
                                       const Constants& c, std::uint64_t seed) {
  check_same_domain(p, q, "near_uniform_identity");
  if (!(delta > 0.0) || !(delta < 1.0))
    throw error("near_uniform_identity: delta must be in (0, 1)");
  const double nn = static_cast<double>(q.n());
  double dev = 0.0;
  for (double v : q.pmf()) dev = std::max(dev, std::abs(v - 1.0 / nn));
  if (dev > 1.0 / (100.0 * nn))
    throw error("near_uniform_identity: q deviates from uniform by more than 1/(100 n)");

  std::uint64_t runs = ceil_count(std::max(1.0, c.c_b * std::log2(1.0 / delta)));
  if (runs % 2 == 0) ++runs;

  RunResult total;
  std::uint64_t far_votes = 0;
  std::optional<Witness> witness;
  for (std::uint64_t k = 0; k < runs; ++k) {
    const AnacondaConfig cfg = uniformity_config(q.n(), eps, c, derive_seed(seed, Stream::Boost, k));
    const RunResult run = anaconda_run(p, q, cfg);
    total.queries_p += run.queries_p;
    total.queries_q += run.queries_q;
    if (run.verdict.outcome == Outcome::Far) {
      ++far_votes;
      if (!witness) witness = run.verdict.witness;
    }
  }
  total.verdict = 2 * far_votes > runs ? Verdict::far(*witness) : Verdict::equal();
  return total;
}

// One draw of the standalone random-set process: j uniform in
// {1, ..., ceil(log2 n)}, r = 2^j, independent 1/r inclusion, no redraw
// (the set may be empty).
struct RandomSet {
  int j;
  std::uint64_t r;
  std::vector<symbol_t> members;
};

inline RandomSet random_discrepancy_set(symbol_t n, Rng& rng) {
  if (n < 2) throw error("random_discrepancy_set: n must be at least 2");
  const int j = 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(log2_ceil(n))));
  return {j, std::uint64_t{1} << j, sample_inclusion(n, std::ldexp(1.0, -j), rng)};
}

}  // namespace anaconda
