#pragma once

// Empirical estimation over a query set, and the Dvoretzky-Kiefer-Wolfowitz
// sample-size bound: Pr[d_K(p, p_hat_m) >= eps] <= 2 exp(-2 m eps^2), hence
// m = ceil(ln(2/delta) / (2 eps^2)) suffices for accuracy eps at confidence
// 1 - delta. The pointwise gap is at most twice the Kolmogorov gap, so
// estimating both sides to d_K accuracy eps/20 separates a true pointwise gap
// of eps (estimates >= 3 eps/4) from equality (estimates <= eps/4);
// linf_detection_sample_size packages that choice.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "anaconda/query_set.hpp"
#include "anaconda/rng.hpp"

namespace anaconda {

class EmpiricalDistribution {
 public:
  EmpiricalDistribution(QuerySet support, std::vector<std::uint64_t> counts)
      : support_(std::move(support)), counts_(std::move(counts)) {
    if (counts_.size() != support_.size())
      throw error("EmpiricalDistribution: counts do not match the support");
    for (std::uint64_t c : counts_) m_ += c;
    if (m_ == 0) throw error("EmpiricalDistribution: needs at least one sample");
  }

  static EmpiricalDistribution from_samples(const std::vector<symbol_t>& samples,
                                            const QuerySet& support) {
    if (samples.empty()) throw error("empirical: needs at least one sample");
    std::vector<std::uint64_t> counts(support.size(), 0);
    for (symbol_t s : samples) {
      const std::size_t pos = support.position_of(s);
      if (pos == QuerySet::npos)
        throw error("empirical: sample " + std::to_string(s) + " outside the support");
      ++counts[pos];
    }
    return EmpiricalDistribution(support, std::move(counts));
  }

  const QuerySet& support() const { return support_; }
  std::uint64_t total() const { return m_; }
  std::uint64_t count(std::size_t pos) const { return counts_.at(pos); }

  double frequency(std::size_t pos) const {
    return static_cast<double>(counts_.at(pos)) / static_cast<double>(m_);
  }

 private:
  QuerySet support_;
  std::vector<std::uint64_t> counts_;
  std::uint64_t m_ = 0;
};

inline EmpiricalDistribution empirical(const std::vector<symbol_t>& samples,
                                       const QuerySet& support) {
  return EmpiricalDistribution::from_samples(samples, support);
}

// Smallest m with 2 exp(-2 m eps^2) <= delta.
inline std::uint64_t dkw_sample_size(double eps, double delta) {
  if (!(eps > 0.0) || !(eps < 1.0)) throw error("dkw_sample_size: eps must be in (0, 1)");
  if (!(delta > 0.0) || !(delta < 1.0)) throw error("dkw_sample_size: delta must be in (0, 1)");
  const double raw = std::log(2.0 / delta) / (2.0 * eps * eps);
  auto m = static_cast<std::uint64_t>(std::ceil(raw));
  if (m < 1) m = 1;
  // settle floating-point boundary cases against the bound itself
  auto ok = [&](std::uint64_t k) {
    return 2.0 * std::exp(-2.0 * static_cast<double>(k) * eps * eps) <= delta;
  };
  while (!ok(m)) ++m;
  while (m > 1 && ok(m - 1)) --m;
  return m;
}

// Per-side sample size for detecting a pointwise gap of eps via two
// empirical estimates (d_K accuracy eps/20 each side).
inline std::uint64_t linf_detection_sample_size(double eps, double delta) {
  return dkw_sample_size(eps / 20.0, delta);
}

// Largest pointwise gap between two empirical distributions on the same
// support; ties broken toward the smallest symbol.
inline SymbolValue max_discrepancy(const EmpiricalDistribution& a,
                                   const EmpiricalDistribution& b) {
  if (!(a.support() == b.support()))
    throw error("max_discrepancy: empirical distributions have different supports");
  SymbolValue best{a.support()[0], 0.0};
  for (std::size_t pos = 0; pos < a.support().size(); ++pos) {
    const double gap = std::abs(a.frequency(pos) - b.frequency(pos));
    if (gap > best.value) best = {a.support()[pos], gap};
  }
  return best;
}

struct WilsonInterval {
  double lower = 0.0;
  double upper = 1.0;
};

// Wilson score interval for a binomial proportion (95% by default).
inline WilsonInterval wilson_interval(std::uint64_t successes, std::uint64_t trials,
                                      double z = 1.959964) {
  if (trials == 0) return {0.0, 1.0};
  if (successes > trials) throw error("wilson_interval: successes exceed trials");
  const double nn = static_cast<double>(trials);
  const double ph = static_cast<double>(successes) / nn;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / nn;
  const double center = (ph + z2 / (2.0 * nn)) / denom;
  const double half = z * std::sqrt(ph * (1.0 - ph) / nn + z2 / (4.0 * nn * nn)) / denom;
  // the endpoints are exact at the boundary proportions
  const double lower = successes == 0 ? 0.0 : std::max(0.0, center - half);
  const double upper = successes == trials ? 1.0 : std::min(1.0, center + half);
  return {lower, upper};
}

}  // namespace anaconda
