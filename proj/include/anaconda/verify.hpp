#pragma once

// Empirical checks of the analysis-level claims behind the tester: each named
// check Monte Carlos one event probability on explicit fixture pmfs (the
// event itself is always evaluated exactly from the pmf, never estimated) and
// compares it against a fixed bound. Thresholds and fixture choices are
// frozen here; the acceptance suite runs all six.
//
//   discrepant-set  max_i |p_S(i) - q_S(i)| >= eps/96 on planned sets
//   uniform-key     some i in S has z+(i) >= 1/r, small-j regime
//   rest-signal     |S \ {i}|/n lands in [1/(2r), 3/(2r)]
//   rest-noise      z(S \ {i}) >= 4/r stays rare
//   appendix-a      |S| = Theta(n/r) jointly with a 1/r-discrepant element
//   dkw             empirical CDF deviation beyond eps at the stated rate

#include <array>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "anaconda/discrepancy.hpp"
#include "anaconda/distribution.hpp"
#include "anaconda/estimate.hpp"
#include "anaconda/oracle.hpp"
#include "anaconda/tester.hpp"

namespace anaconda {

enum class Bound { AtLeast, AtMost };

struct LemmaReport {
  std::string name;
  std::string fixture;
  std::uint64_t draws = 0;
  double observed = 0.0;
  double threshold = 0.0;
  Bound bound = Bound::AtLeast;
  bool passed = false;
  WilsonInterval ci;
  std::string detail;
  double wall_ms = 0.0;
};

inline constexpr std::array<const char*, 6> kLemmaNames = {
    "discrepant-set", "uniform-key", "rest-signal", "rest-noise", "appendix-a", "dkw"};

namespace detail {

inline LemmaReport finish(LemmaReport rep, std::uint64_t hits, std::uint64_t draws,
                          const std::chrono::steady_clock::time_point& t0) {
  rep.draws = draws;
  rep.observed = static_cast<double>(hits) / static_cast<double>(draws);
  rep.ci = wilson_interval(hits, draws);
  rep.passed =
      rep.bound == Bound::AtLeast ? rep.observed >= rep.threshold : rep.observed <= rep.threshold;
  rep.wall_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  return rep;
}

// Fraction of planned sets exposing an exact conditional gap >= eps/96.
inline double discrepant_fraction(const DiscreteDistribution& p, const DiscreteDistribution& q,
                                  double gap_needed, std::uint64_t draws, Rng& rng) {
  const int j_range_max = 2 * log2_ceil(p.n());
  std::uint64_t hits = 0;
  for (std::uint64_t t = 0; t < draws; ++t) {
    const PlannedSet plan = plan_sets(p.n(), 1, j_range_max, rng).front();
    double ps = 0.0, qs = 0.0;
    for (symbol_t i : plan.set) {
      ps += p.prob(i);
      qs += q.prob(i);
    }
    for (symbol_t i : plan.set) {
      if (std::abs(p.prob(i) / ps - q.prob(i) / qs) >= gap_needed) {
        ++hits;
        break;
      }
    }
  }
  return static_cast<double>(hits) / static_cast<double>(draws);
}

// Sum of z over an independent 1/r-inclusion draw from [n] \ {skip}.
inline double z_subset_sum(const std::vector<double>& z, symbol_t n, symbol_t skip,
                           double inclusion, Rng& rng) {
  double acc = 0.0;
  std::uint64_t pos = 0;
  while (true) {
    pos += 1 + rng.geometric_skips(inclusion);
    if (pos > static_cast<std::uint64_t>(n) - 1) break;
    const symbol_t sym = pos < skip ? static_cast<symbol_t>(pos) : static_cast<symbol_t>(pos + 1);
    acc += z[sym - 1];
  }
  return acc;
}

}  // namespace detail

// The planned-set / discrepancy-expression claim: on single-spike and
// random-half fixtures, an eps/96 conditional gap shows up in at least a
// c / log2(n) fraction of planned sets (c pinned at 0.35), and the fraction
// is seed-stable within 20% relative.
inline std::vector<LemmaReport> verify_discrepant_set(std::uint64_t seed) {
  constexpr symbol_t n = 1024;
  constexpr std::uint64_t draws = 100000;
  constexpr double c = 0.35;

  std::vector<LemmaReport> out;
  Rng fixture_rng(derive_seed(seed, Stream::Fixture));
  const DiscreteDistribution u = uniform(n);
  const std::array<std::pair<std::string, DiscreteDistribution>, 2> fixtures = {
      std::pair{std::string("spike(1024, 0.5)"), spike(n, 0.5)},
      std::pair{std::string("paninski(1024, 0.5)"), paninski(n, 0.5, fixture_rng)}};

  int idx = 0;
  for (const auto& [label, p] : fixtures) {
    const auto t0 = std::chrono::steady_clock::now();
    const double eps_actual = tv_distance(p, u);
    LemmaReport rep;
    rep.name = "discrepant-set";
    rep.fixture = label;
    rep.threshold = c / log2_ceil(n);
    rep.bound = Bound::AtLeast;

    Rng rng_a(derive_seed(seed, Stream::Verify, 2 * idx));
    Rng rng_b(derive_seed(seed, Stream::Verify, 2 * idx + 1));
    const double frac_a = detail::discrepant_fraction(p, u, eps_actual / 96.0, draws, rng_a);
    const double frac_b = detail::discrepant_fraction(p, u, eps_actual / 96.0, draws, rng_b);
    const double rel = std::abs(frac_a - frac_b) / std::max(frac_a, frac_b);

    rep.draws = draws;
    rep.observed = frac_a;
    rep.ci = wilson_interval(static_cast<std::uint64_t>(frac_a * draws + 0.5), draws);
    rep.passed = frac_a >= rep.threshold && frac_b >= rep.threshold && rel <= 0.20;
    rep.detail = "second seed " + std::to_string(frac_b) + ", relative spread " +
                 std::to_string(rel) + " (<= 0.20 required)";
    rep.wall_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    out.push_back(rep);
    ++idx;
  }
  return out;
}

// The key-element claim: with all positive discrepancy in dyadic bins
// 1..log2(n/32), a planned set contains i with z+(i) >= 1/r at frequency
// >= 3 / (20 log2(n/32)). Expected ~0.257 on this fixture.
inline std::vector<LemmaReport> verify_uniform_key(std::uint64_t seed) {
  constexpr symbol_t n = 1024;
  constexpr std::uint64_t draws = 100000;
  const int j_range_max = 5;  // log2(n/32)

  const auto t0 = std::chrono::steady_clock::now();
  Rng fixture_rng(derive_seed(seed, Stream::Fixture));
  const DiscreteDistribution p =
      mixed_bins(n, 0.5, MixedBinsLayout{{{3, 1.0}}, {{9, 1.0}}}, fixture_rng);
  const DiscrepancyProfile profile = noise_profile(p, uniform(n));

  LemmaReport rep;
  rep.name = "uniform-key";
  rep.fixture = "mixed_bins(1024, 0.5, +bin3/-bin9)";
  rep.threshold = 3.0 / (20.0 * j_range_max);
  rep.bound = Bound::AtLeast;

  Rng rng(derive_seed(seed, Stream::Verify, 16));
  std::uint64_t hits = 0;
  for (std::uint64_t t = 0; t < draws; ++t) {
    const PlannedSet plan = plan_sets(n, 1, j_range_max, rng).front();
    const double need = 1.0 / static_cast<double>(plan.r);
    for (symbol_t i : plan.set) {
      if (profile.z_plus[i - 1] >= need) {
        ++hits;
        break;
      }
    }
  }
  return {detail::finish(std::move(rep), hits, draws, t0)};
}

// The rest-of-set mass bracketing claim under the uniform distribution:
// |S \ {i}| / n falls within [1/(2r), 3/(2r)] with frequency at least
// 1 - 2/e^2 - 0.02, for each j up to log2(n/32).
inline std::vector<LemmaReport> verify_rest_signal(std::uint64_t seed) {
  constexpr symbol_t n = 1024;
  constexpr std::uint64_t draws = 100000;

  std::vector<LemmaReport> out;
  for (int j = 1; j <= 5; ++j) {
    const auto t0 = std::chrono::steady_clock::now();
    const double r = std::ldexp(1.0, j);
    LemmaReport rep;
    rep.name = "rest-signal";
    rep.fixture = "uniform(1024), j=" + std::to_string(j);
    rep.threshold = 1.0 - 2.0 / (std::exp(1.0) * std::exp(1.0)) - 0.02;
    rep.bound = Bound::AtLeast;

    Rng rng(derive_seed(seed, Stream::Verify, 32 + j));
    std::uint64_t hits = 0;
    for (std::uint64_t t = 0; t < draws; ++t) {
      const std::size_t size = sample_inclusion(n - 1, 1.0 / r, rng).size();
      const double mass = static_cast<double>(size) / static_cast<double>(n);
      if (mass >= 1.0 / (2.0 * r) && mass <= 3.0 / (2.0 * r)) ++hits;
    }
    out.push_back(detail::finish(std::move(rep), hits, draws, t0));
  }
  return out;
}

// The rest-of-set noise claim: the signed discrepancy of S \ {i} exceeds 4/r
// in at most a quarter of draws (checked against 0.25 + 0.01 of Monte Carlo
// slack); reported per fixture as the worst frequency over i in {1, n} and
// j up to log2(n/32).
inline std::vector<LemmaReport> verify_rest_noise(std::uint64_t seed) {
  constexpr symbol_t n = 4096;
  constexpr std::uint64_t draws = 100000;

  Rng fixture_rng(derive_seed(seed, Stream::Fixture));
  const DiscreteDistribution u = uniform(n);
  const std::array<std::pair<std::string, DiscreteDistribution>, 2> fixtures = {
      std::pair{std::string("paninski(4096, 0.5)"), paninski(n, 0.5, fixture_rng)},
      std::pair{std::string("mixed_bins(4096, 0.5, +bin3/-bin11)"),
                mixed_bins(n, 0.5, MixedBinsLayout{{{3, 1.0}}, {{11, 1.0}}}, fixture_rng)}};

  std::vector<LemmaReport> out;
  int idx = 0;
  for (const auto& [label, p] : fixtures) {
    const auto t0 = std::chrono::steady_clock::now();
    const DiscrepancyProfile profile = noise_profile(p, u);
    LemmaReport rep;
    rep.name = "rest-noise";
    rep.fixture = label;
    rep.threshold = 0.25 + 0.01;
    rep.bound = Bound::AtMost;

    double worst = 0.0;
    std::string worst_at = "-";
    Rng rng(derive_seed(seed, Stream::Verify, 64 + idx));
    for (symbol_t skip : {symbol_t{1}, n}) {
      for (int j = 1; j <= 7; ++j) {  // log2(n/32) = 7
        const double r = std::ldexp(1.0, j);
        std::uint64_t hits = 0;
        for (std::uint64_t t = 0; t < draws; ++t) {
          if (detail::z_subset_sum(profile.z, n, skip, 1.0 / r, rng) >= 4.0 / r) ++hits;
        }
        const double freq = static_cast<double>(hits) / static_cast<double>(draws);
        if (freq > worst) {
          worst = freq;
          worst_at = "i=" + std::to_string(skip) + ", j=" + std::to_string(j);
        }
      }
    }
    rep.draws = draws;
    rep.observed = worst;
    rep.ci = wilson_interval(static_cast<std::uint64_t>(worst * draws + 0.5), draws);
    rep.passed = worst <= rep.threshold;
    rep.detail = "worst cell " + worst_at + " over i in {1, n}, j in 1..7";
    rep.wall_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    out.push_back(rep);
    ++idx;
  }
  return out;
}

// The standalone random-set process: |S| lands in [n/(2r), 3n/(2r)] jointly
// with S containing an element of |z| >= c1/r, at frequency >= c2/log2(n).
// c1 = 1.0 and c2 = 0.3 are pinned; expected ~0.136 (spike) / ~0.037
// (paninski).
inline std::vector<LemmaReport> verify_appendix_a(std::uint64_t seed) {
  constexpr symbol_t n = 1024;
  constexpr std::uint64_t draws = 100000;
  constexpr double c1 = 1.0;
  constexpr double c2 = 0.3;

  Rng fixture_rng(derive_seed(seed, Stream::Fixture));
  const DiscreteDistribution u = uniform(n);
  const std::array<std::pair<std::string, DiscreteDistribution>, 2> fixtures = {
      std::pair{std::string("spike(1024, 0.5)"), spike(n, 0.5)},
      std::pair{std::string("paninski(1024, 0.5)"), paninski(n, 0.5, fixture_rng)}};

  std::vector<LemmaReport> out;
  int idx = 0;
  for (const auto& [label, p] : fixtures) {
    const auto t0 = std::chrono::steady_clock::now();
    const DiscrepancyProfile profile = noise_profile(p, u);
    LemmaReport rep;
    rep.name = "appendix-a";
    rep.fixture = label;
    rep.threshold = c2 / log2_ceil(n);
    rep.bound = Bound::AtLeast;

    Rng rng(derive_seed(seed, Stream::Verify, 96 + idx));
    std::uint64_t hits = 0;
    for (std::uint64_t t = 0; t < draws; ++t) {
      const RandomSet s = random_discrepancy_set(n, rng);
      const double r = static_cast<double>(s.r);
      const double size = static_cast<double>(s.members.size());
      if (size < n / (2.0 * r) || size > 3.0 * n / (2.0 * r)) continue;
      for (symbol_t i : s.members) {
        if (std::abs(profile.z[i - 1]) >= c1 / r) {
          ++hits;
          break;
        }
      }
    }
    out.push_back(detail::finish(std::move(rep), hits, draws, t0));
    ++idx;
  }
  return out;
}

// The empirical-CDF deviation bound: at m = 100 and eps = 0.2 the failure
// probability is at most 2 exp(-2 m eps^2) ~ 6.7e-4; we require the observed
// rate over 10^4 trials to stay under 0.005.
inline std::vector<LemmaReport> verify_dkw(std::uint64_t seed) {
  constexpr symbol_t n = 16;
  constexpr std::uint64_t m = 100;
  constexpr std::uint64_t trials = 10000;
  constexpr double eps = 0.2;

  const auto t0 = std::chrono::steady_clock::now();
  const DiscreteDistribution u = uniform(n);
  LemmaReport rep;
  rep.name = "dkw";
  rep.fixture = "uniform(16), m=100, eps=0.2";
  rep.threshold = 0.005;
  rep.bound = Bound::AtMost;
  rep.detail = "analytic bound 2 exp(-2 m eps^2) = 6.71e-4";

  Rng rng(derive_seed(seed, Stream::Verify, 128));
  std::uint64_t fails = 0;
  for (std::uint64_t t = 0; t < trials; ++t) {
    std::array<std::uint64_t, n> counts{};
    for (std::uint64_t k = 0; k < m; ++k) ++counts[samp_draw(u, rng) - 1];
    double cum = 0.0, worst = 0.0;
    for (symbol_t i = 1; i <= n; ++i) {
      cum += static_cast<double>(counts[i - 1]) / static_cast<double>(m);
      worst = std::max(worst, std::abs(cum - static_cast<double>(i) / n));
    }
    if (worst > eps) ++fails;
  }
  return {detail::finish(std::move(rep), fails, trials, t0)};
}

inline std::vector<LemmaReport> verify_lemma(const std::string& name, std::uint64_t seed) {
  if (name == "discrepant-set") return verify_discrepant_set(seed);
  if (name == "uniform-key") return verify_uniform_key(seed);
  if (name == "rest-signal") return verify_rest_signal(seed);
  if (name == "rest-noise") return verify_rest_noise(seed);
  if (name == "appendix-a") return verify_appendix_a(seed);
  if (name == "dkw") return verify_dkw(seed);
  throw error("verify_lemma: unknown check '" + name + "'");
}

}  // namespace anaconda
