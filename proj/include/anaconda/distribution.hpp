#pragma once

// Discrete distributions over {1, ..., n}, distance computations, exact
// conditioning, and the fixture generators used throughout the test harness.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <numeric>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "anaconda/query_set.hpp"
#include "anaconda/rng.hpp"

namespace anaconda {

constexpr double kMassTolerance = 1e-9;      // internal pmf validity
constexpr double kFileMassTolerance = 1e-6;  // ingestion, before renormalizing

class DiscreteDistribution {
 public:
  explicit DiscreteDistribution(std::vector<double> pmf) : pmf_(std::move(pmf)) {
    if (pmf_.empty()) throw error("DiscreteDistribution: empty pmf");
    double total = 0.0;
    for (std::size_t i = 0; i < pmf_.size(); ++i) {
      if (!(pmf_[i] >= 0.0))
        throw error("DiscreteDistribution: negative mass at symbol " + std::to_string(i + 1));
      total += pmf_[i];
    }
    if (std::abs(total - 1.0) > kMassTolerance)
      throw error("DiscreteDistribution: total mass " + std::to_string(total) + " is not 1");
  }

  symbol_t n() const { return static_cast<symbol_t>(pmf_.size()); }

  double prob(symbol_t i) const {
    if (i < 1 || i > pmf_.size())
      throw error("DiscreteDistribution: symbol " + std::to_string(i) + " out of range");
    return pmf_[i - 1];
  }

  const std::vector<double>& pmf() const { return pmf_; }

  double mass(const QuerySet& s) const {
    s.check_within(n(), "DiscreteDistribution::mass");
    double total = 0.0;
    for (symbol_t i : s) total += pmf_[i - 1];
    return total;
  }

  bool operator==(const DiscreteDistribution& other) const { return pmf_ == other.pmf_; }

 private:
  std::vector<double> pmf_;
};

inline void check_same_domain(const DiscreteDistribution& p, const DiscreteDistribution& q,
                              const char* op) {
  if (p.n() != q.n())
    throw error(std::string(op) + ": domain sizes differ (" + std::to_string(p.n()) + " vs " +
                std::to_string(q.n()) + ")");
}

inline double tv_distance(const DiscreteDistribution& p, const DiscreteDistribution& q) {
  check_same_domain(p, q, "tv_distance");
  double sum = 0.0;
  for (symbol_t i = 0; i < p.n(); ++i) sum += std::abs(p.pmf()[i] - q.pmf()[i]);
  return 0.5 * sum;
}

inline double kolmogorov_distance(const DiscreteDistribution& p, const DiscreteDistribution& q) {
  check_same_domain(p, q, "kolmogorov_distance");
  double gap = 0.0, cdf_p = 0.0, cdf_q = 0.0;
  for (symbol_t i = 0; i < p.n(); ++i) {
    cdf_p += p.pmf()[i];
    cdf_q += q.pmf()[i];
    gap = std::max(gap, std::abs(cdf_p - cdf_q));
  }
  return gap;
}

// Largest pointwise gap; ties broken toward the smallest symbol.
inline SymbolValue linf_distance(const DiscreteDistribution& p, const DiscreteDistribution& q) {
  check_same_domain(p, q, "linf_distance");
  SymbolValue best{1, 0.0};
  for (symbol_t i = 0; i < p.n(); ++i) {
    const double gap = std::abs(p.pmf()[i] - q.pmf()[i]);
    if (gap > best.value) best = {i + 1, gap};
  }
  return best;
}

// Conditional distribution of p on S, over the local domain {1, ..., |S|}
// (position k+1 corresponds to S[k]). A zero-mass S conditions to the uniform
// distribution on S.
inline DiscreteDistribution conditional(const DiscreteDistribution& p, const QuerySet& s) {
  s.check_within(p.n(), "conditional");
  const double total = p.mass(s);
  std::vector<double> pmf(s.size());
  if (total > 0.0) {
    for (std::size_t k = 0; k < s.size(); ++k) pmf[k] = p.prob(s[k]) / total;
  } else {
    std::fill(pmf.begin(), pmf.end(), 1.0 / static_cast<double>(s.size()));
  }
  return DiscreteDistribution(std::move(pmf));
}

// ---------------------------------------------------------------------------
// Generators. All outputs are valid pmfs (nonnegative, unit mass within
// 1e-9); every generator requires n >= 2.

namespace detail {
inline void check_generator_args(symbol_t n, double eps) {
  if (n < 2) throw error("generator: n must be at least 2");
  if (!(eps > 0.0) || eps > 1.0) throw error("generator: eps must be in (0, 1]");
}
}  // namespace detail

inline DiscreteDistribution uniform(symbol_t n) {
  if (n < 2) throw error("uniform: n must be at least 2");
  return DiscreteDistribution(std::vector<double>(n, 1.0 / static_cast<double>(n)));
}

// Single heavy symbol at i* = 1: p(1) = 1/n + eps, the rest share the deficit
// evenly, so the total-variation distance to uniform is exactly eps. Requires
// eps <= 1 - 1/n for nonnegativity.
inline DiscreteDistribution spike(symbol_t n, double eps) {
  detail::check_generator_args(n, eps);
  const double nn = static_cast<double>(n);
  if (eps > 1.0 - 1.0 / nn) throw error("spike: eps must be at most 1 - 1/n");
  std::vector<double> pmf(n, 1.0 / nn - eps / (nn - 1.0));
  pmf[0] = 1.0 / nn + eps;
  return DiscreteDistribution(std::move(pmf));
}

// A uniformly random half of the domain at (1+eps)/n, the other half at
// (1-eps)/n; total-variation distance to uniform is exactly eps/2.
inline DiscreteDistribution paninski(symbol_t n, double eps, Rng& rng) {
  detail::check_generator_args(n, eps);
  if (n % 2 != 0) throw error("paninski: n must be even");
  const double nn = static_cast<double>(n);
  std::vector<double> pmf(n, (1.0 + eps) / nn);
  for (symbol_t i = n / 2; i < n; ++i) pmf[i] = (1.0 - eps) / nn;
  rng.shuffle(pmf);
  return DiscreteDistribution(std::move(pmf));
}

// Layout for mixed_bins: how much of the positive (resp. negative) deviation
// mass, measured in noise-vector units where each side totals 1, lands in
// each dyadic bin [2^-j, 2^-j+1).
struct BinMass {
  int bin;
  double mass;
};

struct MixedBinsLayout {
  std::vector<BinMass> positive;
  std::vector<BinMass> negative;
};

// Builds p = uniform + eps * z where the positive and negative parts of the
// noise vector z have the prescribed per-bin masses. Each bin request of mass
// w is realized as k = floor(w * 2^j) equal entries w/k, which land in
// [2^-j, 2^-j+1) whenever w >= 2^-j. Placement positions are randomized.
inline DiscreteDistribution mixed_bins(symbol_t n, double eps, const MixedBinsLayout& layout,
                                       Rng& rng) {
  detail::check_generator_args(n, eps);
  const double nn = static_cast<double>(n);

  auto expand = [](const std::vector<BinMass>& side, const char* name) {
    std::vector<double> entries;
    double total = 0.0;
    for (const BinMass& bm : side) {
      if (bm.bin < 0) throw error("mixed_bins: bin indices must be nonnegative");
      if (!(bm.mass > 0.0)) throw error("mixed_bins: bin masses must be positive");
      total += bm.mass;
      const double scale = std::ldexp(1.0, bm.bin);  // 2^bin
      const auto k = static_cast<std::uint64_t>(std::floor(bm.mass * scale));
      if (k < 1)
        throw error(std::string("mixed_bins: ") + name + " mass too small for bin " +
                    std::to_string(bm.bin));
      for (std::uint64_t c = 0; c < k; ++c) entries.push_back(bm.mass / static_cast<double>(k));
    }
    if (std::abs(total - 1.0) > kMassTolerance)
      throw error(std::string("mixed_bins: ") + name + " bin masses must total 1");
    return entries;
  };

  const std::vector<double> pos = expand(layout.positive, "positive");
  const std::vector<double> neg = expand(layout.negative, "negative");
  if (pos.size() + neg.size() > n) throw error("mixed_bins: layout needs more symbols than n");
  for (double z : neg) {
    if (eps * z > 1.0 / nn + 1e-15)
      throw error("mixed_bins: negative entry would push the pmf below zero");
  }

  std::vector<symbol_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  rng.shuffle(order);

  std::vector<double> pmf(n, 1.0 / nn);
  std::size_t slot = 0;
  for (double z : pos) pmf[order[slot++]] += eps * z;
  for (double z : neg) {
    double& cell = pmf[order[slot++]];
    cell = std::max(0.0, cell - eps * z);
  }
  return DiscreteDistribution(std::move(pmf));
}

// q with ||q - uniform||_inf <= delta_inf, by paired +/- perturbations.
// Requires delta_inf <= 1/(100 n).
inline DiscreteDistribution near_uniform_perturb(symbol_t n, double delta_inf, Rng& rng) {
  if (n < 2) throw error("near_uniform_perturb: n must be at least 2");
  const double nn = static_cast<double>(n);
  if (!(delta_inf >= 0.0) || delta_inf > 1.0 / (100.0 * nn))
    throw error("near_uniform_perturb: delta_inf must be in [0, 1/(100 n)]");
  std::vector<double> pmf(n, 1.0 / nn);
  for (symbol_t i = 0; i + 1 < n; i += 2) {
    const double d = delta_inf * rng.next_double();
    pmf[i] += d;
    pmf[i + 1] -= d;
  }
  return DiscreteDistribution(std::move(pmf));
}

// q(i) proportional to 1 + i/(2n): a gentle deterministic tilt whose values
// spread across many multiplicative buckets.
inline DiscreteDistribution linear_tilt(symbol_t n) {
  if (n < 2) throw error("linear_tilt: n must be at least 2");
  const double nn = static_cast<double>(n);
  std::vector<double> pmf(n);
  double total = 0.0;
  for (symbol_t i = 0; i < n; ++i) {
    pmf[i] = 1.0 + static_cast<double>(i + 1) / (2.0 * nn);
    total += pmf[i];
  }
  for (double& v : pmf) v /= total;
  return DiscreteDistribution(std::move(pmf));
}

inline DiscreteDistribution permuted(const DiscreteDistribution& p, Rng& rng) {
  std::vector<double> pmf = p.pmf();
  rng.shuffle(pmf);
  return DiscreteDistribution(std::move(pmf));
}

// Far fixture relative to a base q: within each consecutive pair, move a
// 2*strength fraction of the heavier symbol's mass onto the lighter one.
// For near-uniform q this yields tv_distance(p, q) >= strength (the moved
// mass is 2*strength * sum of per-pair maxima >= strength). Requires even n
// and strength in (0, 1/2].
inline DiscreteDistribution pair_collapse(const DiscreteDistribution& q, double strength) {
  if (q.n() % 2 != 0) throw error("pair_collapse: n must be even");
  if (!(strength > 0.0) || strength > 0.5) throw error("pair_collapse: strength must be in (0, 1/2]");
  std::vector<double> pmf = q.pmf();
  for (symbol_t i = 0; i + 1 < q.n(); i += 2) {
    const symbol_t heavy = pmf[i] >= pmf[i + 1] ? i : i + 1;
    const symbol_t light = heavy == i ? i + 1 : i;
    const double moved = 2.0 * strength * pmf[heavy];
    pmf[heavy] -= moved;
    pmf[light] += moved;
  }
  return DiscreteDistribution(std::move(pmf));
}

// ---------------------------------------------------------------------------
// File format: one nonnegative decimal per line; the line count is the domain
// size. The total must be within 1e-6 of 1 and is then renormalized exactly.

inline DiscreteDistribution from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw error("from_file: cannot open " + path);
  std::vector<double> pmf;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    // allow surrounding whitespace; skip blank lines
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos) continue;
    const auto last = line.find_last_not_of(" \t\r");
    const std::string token = line.substr(first, last - first + 1);
    double value = 0.0;
    std::size_t consumed = 0;
    try {
      value = std::stod(token, &consumed);
    } catch (const std::exception&) {
      throw error(path + ":" + std::to_string(line_no) + ": not a number: '" + token + "'");
    }
    if (consumed != token.size())
      throw error(path + ":" + std::to_string(line_no) + ": trailing characters: '" + token + "'");
    if (!(value >= 0.0))
      throw error(path + ":" + std::to_string(line_no) + ": negative value " + token);
    pmf.push_back(value);
  }
  if (pmf.size() < 2) throw error("from_file: " + path + " must contain at least 2 values");
  const double total = std::accumulate(pmf.begin(), pmf.end(), 0.0);
  if (std::abs(total - 1.0) > kFileMassTolerance)
    throw error("from_file: " + path + ": total mass " + std::to_string(total) +
                " is not within 1e-6 of 1");
  for (double& v : pmf) v /= total;
  return DiscreteDistribution(std::move(pmf));
}

inline void to_file(const DiscreteDistribution& p, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw error("to_file: cannot open " + path);
  out.precision(17);
  for (double v : p.pmf()) out << v << '\n';
  if (!out) throw error("to_file: write failed for " + path);
}

}  // namespace anaconda
