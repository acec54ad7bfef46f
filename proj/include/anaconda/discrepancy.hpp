#pragma once

// Noise-vector machinery: given (p, q) at total-variation distance eps, the
// noise vector is z = (p - q)/eps, so ||z||_1 = 2 and sum(z) = 0. The profile
// keeps its positive/negative rectifications, a truncated copy that zeroes
// entries too small to matter relative to (p+q), and the dyadic bin partition
// used to group entries by magnitude.

#include <cmath>
#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "anaconda/distribution.hpp"

namespace anaconda {

struct DiscrepancyProfile {
  double eps = 0.0;                // exact tv distance between the pair
  std::vector<double> z;           // (p - q)/eps
  std::vector<double> z_plus;      // max(z, 0), sums to 1
  std::vector<double> z_minus;     // max(-z, 0), sums to 1
  std::vector<double> z_hat;       // z with relatively-tiny entries zeroed
  std::vector<symbol_t> zeroed;    // symbols i with |z(i)| <= (p(i)+q(i))/(400 log2 n)

  symbol_t n() const { return static_cast<symbol_t>(z.size()); }

  std::vector<double> z_hat_plus() const {
    std::vector<double> v(z_hat.size());
    for (std::size_t i = 0; i < z_hat.size(); ++i) v[i] = z_hat[i] > 0.0 ? z_hat[i] : 0.0;
    return v;
  }

  std::vector<double> z_hat_minus() const {
    std::vector<double> v(z_hat.size());
    for (std::size_t i = 0; i < z_hat.size(); ++i) v[i] = z_hat[i] < 0.0 ? -z_hat[i] : 0.0;
    return v;
  }
};

inline DiscrepancyProfile noise_profile(const DiscreteDistribution& p,
                                        const DiscreteDistribution& q) {
  check_same_domain(p, q, "noise_profile");
  const double eps = tv_distance(p, q);
  if (!(eps > 0.0)) throw error("noise_profile: distributions are identical");

  const symbol_t n = p.n();
  const double log2n = std::log2(static_cast<double>(n));
  DiscrepancyProfile prof;
  prof.eps = eps;
  prof.z.resize(n);
  prof.z_plus.resize(n);
  prof.z_minus.resize(n);
  prof.z_hat.resize(n);
  for (symbol_t i = 0; i < n; ++i) {
    const double zi = (p.pmf()[i] - q.pmf()[i]) / eps;
    prof.z[i] = zi;
    prof.z_plus[i] = zi > 0.0 ? zi : 0.0;
    prof.z_minus[i] = zi < 0.0 ? -zi : 0.0;
    const double cutoff = (p.pmf()[i] + q.pmf()[i]) / (400.0 * log2n);
    if (std::abs(zi) > cutoff) {
      prof.z_hat[i] = zi;
    } else {
      prof.z_hat[i] = 0.0;
      prof.zeroed.push_back(i + 1);
    }
  }
  return prof;
}

// Dyadic magnitude bins: symbol i lands in bin j iff 2^-j <= x(i) < 2^-j+1.
// Classification is exact via frexp. Entries of 1.0 or above land in bins
// j <= 0, which occur for noise vectors with a single dominant entry.
struct BinPartition {
  std::map<int, std::vector<symbol_t>> bins;
  std::vector<double> source;

  // b(j): total x-mass of bin j
  double mass(int j) const {
    auto it = bins.find(j);
    if (it == bins.end()) return 0.0;
    double total = 0.0;
    for (symbol_t i : it->second) total += source[i - 1];
    return total;
  }
};

inline int dyadic_bin(double x) {
  int exp = 0;
  std::frexp(x, &exp);  // x = f * 2^exp with f in [1/2, 1)
  return 1 - exp;
}

inline BinPartition bin_partition(std::vector<double> x) {
  BinPartition part;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (x[i] < 0.0)
      throw error("bin_partition: negative entry at symbol " + std::to_string(i + 1));
    if (x[i] == 0.0) continue;  // zero entries belong to no bin
    part.bins[dyadic_bin(x[i])].push_back(static_cast<symbol_t>(i + 1));
  }
  part.source = std::move(x);
  return part;
}

// |p_S(i) - q_S(i)| computed exactly from the pmfs, with the zero-mass
// convention (conditioning on a zero-mass set yields uniform on S) applied to
// each side independently.
inline double discrepancy_expression(const DiscreteDistribution& p, const DiscreteDistribution& q,
                                     const QuerySet& s, symbol_t i) {
  check_same_domain(p, q, "discrepancy_expression");
  s.check_within(p.n(), "discrepancy_expression");
  if (!s.contains(i))
    throw error("discrepancy_expression: symbol " + std::to_string(i) + " not in the query set");
  const double ps = p.mass(s), qs = q.mass(s);
  const double unif = 1.0 / static_cast<double>(s.size());
  const double p_side = ps > 0.0 ? p.prob(i) / ps : unif;
  const double q_side = qs > 0.0 ? q.prob(i) / qs : unif;
  return std::abs(p_side - q_side);
}

}  // namespace anaconda
