#pragma once

// Simulated sampling oracles.
//
// NacondSession enforces the non-adaptive conditional-sampling contract: all
// query sets are registered up front, the session is sealed, and only then
// may outcomes be drawn. Draw-before-seal and register-after-seal are
// rejected (and counted, so test harnesses can assert zero violations).
// Conditioning on a zero-mass set yields a uniform draw over the set.
//
// SampOracle is the plain i.i.d. sampling oracle over the full domain. Both
// use inverse-CDF sampling so exactness is directly testable.

#include <atomic>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "anaconda/distribution.hpp"
#include "anaconda/query_set.hpp"
#include "anaconda/rng.hpp"

namespace anaconda {

struct QueryLedger {
  std::vector<std::uint64_t> per_set;
  std::uint64_t total = 0;
};

class NacondSession {
 public:
  NacondSession(DiscreteDistribution target, std::uint64_t seed)
      : target_(std::move(target)), rng_(seed) {}

  std::size_t register_set(QuerySet s) {
    if (sealed_) {
      ++violations_;
      throw error("NacondSession: cannot register query sets after sealing");
    }
    s.check_within(target_.n(), "NacondSession::register_set");
    sets_.push_back(std::move(s));
    return sets_.size() - 1;
  }

  void seal() {
    if (sealed_) return;  // idempotent
    if (sets_.empty()) throw error("NacondSession: cannot seal with no registered sets");
    prepared_.reserve(sets_.size());
    for (const QuerySet& s : sets_) {
      Prepared prep;
      const double total = target_.mass(s);
      prep.cum.resize(s.size());
      double acc = 0.0;
      if (total > 0.0) {
        for (std::size_t k = 0; k < s.size(); ++k) {
          acc += target_.prob(s[k]) / total;
          prep.cum[k] = acc;
        }
      } else {
        const double w = 1.0 / static_cast<double>(s.size());
        for (std::size_t k = 0; k < s.size(); ++k) {
          acc += w;
          prep.cum[k] = acc;
        }
      }
      prep.cum.back() = 1.0;
      prepared_.push_back(std::move(prep));
    }
    ledger_.per_set.assign(sets_.size(), 0);
    sealed_ = true;
  }

  bool sealed() const { return sealed_; }
  std::size_t set_count() const { return sets_.size(); }

  const QuerySet& set(std::size_t id) const {
    if (id >= sets_.size()) throw error("NacondSession: unknown set id");
    return sets_[id];
  }

  symbol_t draw(std::size_t set_id) {
    if (!sealed_) {
      ++violations_;
      throw error("NacondSession: cannot draw before sealing");
    }
    if (set_id >= sets_.size()) throw error("NacondSession: unknown set id");
    const Prepared& prep = prepared_[set_id];
    const double u = rng_.next_double();
    std::size_t lo = 0, hi = prep.cum.size() - 1;
    while (lo < hi) {
      const std::size_t mid = (lo + hi) / 2;
      if (prep.cum[mid] > u) {
        hi = mid;
      } else {
        lo = mid + 1;
      }
    }
    ++ledger_.per_set[set_id];
    ++ledger_.total;
    return sets_[set_id][lo];
  }

  const QueryLedger& ledger() const { return ledger_; }
  const DiscreteDistribution& target() const { return target_; }

  static std::uint64_t contract_violations() { return violations_.load(); }
  static void reset_contract_violations() { violations_.store(0); }

 private:
  struct Prepared {
    std::vector<double> cum;
  };

  DiscreteDistribution target_;
  std::vector<QuerySet> sets_;
  std::vector<Prepared> prepared_;
  QueryLedger ledger_;
  Rng rng_;
  bool sealed_ = false;

  inline static std::atomic<std::uint64_t> violations_{0};
};

class SampOracle {
 public:
  SampOracle(DiscreteDistribution target, std::uint64_t seed)
      : target_(std::move(target)), rng_(seed) {
    cum_.resize(target_.n());
    double acc = 0.0;
    for (symbol_t i = 0; i < target_.n(); ++i) {
      acc += target_.pmf()[i];
      cum_[i] = acc;
    }
    cum_.back() = 1.0;
  }

  symbol_t draw() {
    const double u = rng_.next_double();
    std::size_t lo = 0, hi = cum_.size() - 1;
    while (lo < hi) {
      const std::size_t mid = (lo + hi) / 2;
      if (cum_[mid] > u) {
        hi = mid;
      } else {
        lo = mid + 1;
      }
    }
    ++count_;
    return static_cast<symbol_t>(lo + 1);
  }

  std::uint64_t count() const { return count_; }
  const DiscreteDistribution& target() const { return target_; }

 private:
  DiscreteDistribution target_;
  std::vector<double> cum_;
  Rng rng_;
  std::uint64_t count_ = 0;
};

// One-off i.i.d. draw by linear inverse-CDF scan.
inline symbol_t samp_draw(const DiscreteDistribution& p, Rng& rng) {
  const double u = rng.next_double();
  double acc = 0.0;
  for (symbol_t i = 0; i < p.n(); ++i) {
    acc += p.pmf()[i];
    if (acc > u) return i + 1;
  }
  return p.n();
}

}  // namespace anaconda
