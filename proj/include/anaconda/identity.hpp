#pragma once

// Identity testing against an arbitrary known q via bucketing.
//
// Symbols are grouped by q-probability into geometric buckets with ratio
// (1 + rho): M_0 holds everything below tau/n, and M_j (1 <= j <= k) holds
// [tau/n (1+rho)^(j-1), tau/n (1+rho)^j). Within a bucket the conditional of
// q is pointwise within rho/|M_j| of uniform, so each bucket can be handled
// by the near-uniform identity tester; the coarse distribution over buckets
// is checked directly from plain samples of p.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <utility>
#include <vector>

#include "anaconda/distribution.hpp"
#include "anaconda/estimate.hpp"
#include "anaconda/oracle.hpp"
#include "anaconda/tester.hpp"

namespace anaconda {

struct BucketPartition {
  double tau = 0.0;
  double ratio = 0.0;
  std::vector<double> edges;                 // edges[j] = tau/n * (1+ratio)^j, j = 0..k
  std::vector<std::vector<symbol_t>> buckets;  // buckets[j] = M_j, j = 0..k

  int k() const { return static_cast<int>(buckets.size()) - 1; }
};

inline BucketPartition bucket(const DiscreteDistribution& q, double tau, double ratio) {
  if (!(tau > 0.0) || !(tau < 1.0)) throw error("bucket: tau must be in (0, 1)");
  if (!(ratio > 0.0) || !(ratio < 1.0)) throw error("bucket: ratio must be in (0, 1)");
  const double n = static_cast<double>(q.n());
  const int k =
      static_cast<int>(ceil_count(std::log(n / tau) / std::log1p(ratio)));

  BucketPartition part;
  part.tau = tau;
  part.ratio = ratio;
  part.edges.resize(k + 1);
  for (int j = 0; j <= k; ++j) part.edges[j] = tau / n * std::pow(1.0 + ratio, j);
  part.buckets.assign(k + 1, {});

  for (symbol_t i = 1; i <= q.n(); ++i) {
    const double v = q.prob(i);
    int j = 0;
    if (v >= part.edges[0]) {
      j = 1 + static_cast<int>(std::floor(std::log(v / part.edges[0]) / std::log1p(ratio)));
      j = std::clamp(j, 1, k);
      while (j > 1 && v < part.edges[j - 1]) --j;    // settle fp rounding against the
      while (j < k && v >= part.edges[j]) ++j;       // exact precomputed edges
    }
    part.buckets[j].push_back(i);
  }
  return part;
}

struct ReducedPair {
  DiscreteDistribution p_tilde;
  DiscreteDistribution q_tilde;
};

// Collapse each distribution to its bucket-mass vector over k+1 outcomes
// (outcome j+1 <-> bucket M_j).
inline ReducedPair reduce(const DiscreteDistribution& p, const DiscreteDistribution& q,
                          const BucketPartition& part) {
  check_same_domain(p, q, "reduce");
  std::vector<double> pm, qm;
  pm.reserve(part.buckets.size());
  qm.reserve(part.buckets.size());
  for (const std::vector<symbol_t>& members : part.buckets) {
    double ps = 0.0, qs = 0.0;
    for (symbol_t i : members) {
      ps += p.prob(i);
      qs += q.prob(i);
    }
    pm.push_back(ps);
    qm.push_back(qs);
  }
  return {DiscreteDistribution(std::move(pm)), DiscreteDistribution(std::move(qm))};
}

struct SmallSupportResult {
  Outcome outcome = Outcome::Equal;
  std::uint64_t queries = 0;
  double tv = 0.0;
};

// Plain-sampling identity test on a small support: draw
// m = ceil(c_s (n + ln(2/delta)) / eps^2) samples of p and accept iff the
// empirical TV distance to q stays below eps/2.
template <typename Sampler>
SmallSupportResult small_support_identity_test(Sampler&& sample, const DiscreteDistribution& q,
                                               double eps, double delta, double c_s = 4.0) {
  if (!(eps > 0.0) || eps > 1.0)
    throw error("small_support_identity_test: eps must be in (0, 1]");
  if (!(delta > 0.0) || !(delta < 1.0))
    throw error("small_support_identity_test: delta must be in (0, 1)");
  const double support = static_cast<double>(q.n());
  const std::uint64_t m =
      ceil_count(c_s * (support + std::log(2.0 / delta)) / (eps * eps));

  std::vector<std::uint64_t> counts(q.n(), 0);
  for (std::uint64_t t = 0; t < m; ++t) {
    const symbol_t s = sample();
    if (s < 1 || s > q.n()) throw error("small_support_identity_test: sample out of range");
    ++counts[s - 1];
  }
  std::vector<double> emp(q.n());
  for (symbol_t i = 0; i < q.n(); ++i)
    emp[i] = static_cast<double>(counts[i]) / static_cast<double>(m);

  double tv = 0.0;
  for (symbol_t i = 1; i <= q.n(); ++i) tv += std::abs(emp[i - 1] - q.prob(i));
  tv /= 2.0;

  SmallSupportResult res;
  res.queries = m;
  res.tv = tv;
  res.outcome = tv < eps / 2.0 ? Outcome::Equal : Outcome::Far;
  return res;
}

struct BucketReport {
  int bucket = 0;
  std::uint64_t size = 0;
  bool tested = false;
  Outcome outcome = Outcome::Equal;
  std::uint64_t queries_p = 0;
  std::uint64_t queries_q = 0;
  double linf_dev = 0.0;    // max_i |q_M(i) - 1/|M||
  double linf_bound = 0.0;  // ratio / |M|
};

struct IdentityResult {
  Outcome outcome = Outcome::Equal;
  std::uint64_t queries_p = 0;
  std::uint64_t queries_q = 0;
  SmallSupportResult reduced;
  std::vector<BucketReport> buckets;
  int far_bucket = -1;  // -1: none; 0: reduced stage; j >= 1: bucket M_j
  std::optional<Witness> witness;
};

// Full identity test of SAMP+NACOND access to p against explicit q:
// tau = eps/100, ratio = 1/100. Every multi-symbol bucket M_j is tested at
// distance eps/2 with per-bucket failure budget
// (1/3) log(1+ratio) / (2 log(n/tau)); afterwards the coarse bucket-mass
// distribution is checked at eps/2 with budget 1/6 from plain samples of p.
// M_0 is never tested conditionally — a mass defect there shows up in the
// coarse stage.
inline IdentityResult identity_test(const DiscreteDistribution& p, const DiscreteDistribution& q,
                                    double eps, const Constants& c, std::uint64_t seed) {
  check_same_domain(p, q, "identity_test");
  if (!(eps > 0.0) || eps > 1.0) throw error("identity_test: eps must be in (0, 1]");
  if (p.n() < 2) throw error("identity_test: n must be at least 2");

  const double tau = eps / 100.0;
  const BucketPartition part = bucket(q, tau, 0.01);
  const double delta_b =
      (1.0 / 3.0) * std::log1p(part.ratio) / (2.0 * std::log(static_cast<double>(q.n()) / tau));

  IdentityResult res;

  for (int j = 1; j <= part.k(); ++j) {
    const std::vector<symbol_t>& members = part.buckets[j];
    if (members.empty()) continue;
    BucketReport report;
    report.bucket = j;
    report.size = members.size();
    if (members.size() < 2) {  // a singleton conditional is exactly uniform
      res.buckets.push_back(report);
      continue;
    }
    const QuerySet set{std::vector<symbol_t>(members)};
    const DiscreteDistribution p_m = conditional(p, set);
    const DiscreteDistribution q_m = conditional(q, set);

    const double inv = 1.0 / static_cast<double>(members.size());
    for (symbol_t i = 1; i <= q_m.n(); ++i)
      report.linf_dev = std::max(report.linf_dev, std::abs(q_m.prob(i) - inv));
    report.linf_bound = part.ratio * inv;

    const RunResult run = near_uniform_identity(p_m, q_m, eps / 2.0, delta_b, c,
                                                derive_seed(seed, Stream::Bucket, j));
    report.tested = true;
    report.outcome = run.verdict.outcome;
    report.queries_p = run.queries_p;
    report.queries_q = run.queries_q;
    res.queries_p += run.queries_p;
    res.queries_q += run.queries_q;
    res.buckets.push_back(report);

    if (run.verdict.outcome == Outcome::Far) {
      res.outcome = Outcome::Far;
      res.far_bucket = j;
      res.witness = run.verdict.witness;
      return res;
    }
  }

  ReducedPair red = reduce(p, q, part);
  SampOracle samp(p, derive_seed(seed, Stream::Samp));
  std::vector<int> bucket_of(p.n() + 1, 0);
  for (int j = 0; j <= part.k(); ++j)
    for (symbol_t i : part.buckets[j]) bucket_of[i] = j;
  res.reduced = small_support_identity_test(
      [&] { return static_cast<symbol_t>(bucket_of[samp.draw()] + 1); }, red.q_tilde, eps / 2.0,
      1.0 / 6.0);
  res.queries_p += res.reduced.queries;
  if (res.reduced.outcome == Outcome::Far) {
    res.outcome = Outcome::Far;
    res.far_bucket = 0;
  }
  return res;
}

}  // namespace anaconda
