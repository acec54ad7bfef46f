#pragma once

// Monte Carlo harness: named (p, q) fixture families per mode, seeded trial
// running (optionally threaded), summary statistics with Wilson intervals,
// and CSV / JSON-lines emission. A trial is fully determined by
// (spec, trial_id): everything downstream derives from one per-trial seed.

#include <atomic>
#include <chrono>
#include <cstdint>
#include <iomanip>
#include <mutex>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "json.hpp"

#include "anaconda/distribution.hpp"
#include "anaconda/identity.hpp"
#include "anaconda/tester.hpp"

namespace anaconda {

enum class Mode { Uniformity, Identity, Equivalence, NearUniformIdentity };

inline const char* to_string(Mode m) {
  switch (m) {
    case Mode::Uniformity: return "uniformity";
    case Mode::Identity: return "identity";
    case Mode::Equivalence: return "equivalence";
    case Mode::NearUniformIdentity: return "near-uniform-identity";
  }
  throw error("to_string: bad mode");
}

inline Mode mode_from_string(const std::string& s) {
  if (s == "uniformity") return Mode::Uniformity;
  if (s == "identity") return Mode::Identity;
  if (s == "equivalence") return Mode::Equivalence;
  if (s == "near-uniform-identity") return Mode::NearUniformIdentity;
  throw error("unknown mode '" + s + "'");
}

inline std::string default_fixture(Mode mode) {
  switch (mode) {
    case Mode::Uniformity: return "paninski";
    case Mode::Identity: return "bucket-perturb";
    case Mode::Equivalence: return "paninski";
    case Mode::NearUniformIdentity: return "pair-collapse";
  }
  throw error("default_fixture: bad mode");
}

// Far instance that preserves every bucket mass of q exactly: within each
// multi-symbol bucket, consecutive members are paired and 2s*q(heavy) moves
// heavy -> light (an odd leftover member is drained into the first pair's
// light element at the same rate). The coarse bucket distribution cannot see
// it; the per-bucket conditionals carry the full distance.
inline DiscreteDistribution bucket_perturb_far(const DiscreteDistribution& q, double eps) {
  if (!(eps > 0.0) || eps > 1.0) throw error("bucket_perturb_far: eps must be in (0, 1]");
  const double s = std::min(0.5, eps);
  const BucketPartition part = bucket(q, eps / 100.0, 0.01);
  std::vector<double> pmf = q.pmf();
  for (int j = 1; j <= part.k(); ++j) {
    const std::vector<symbol_t>& mem = part.buckets[j];
    if (mem.size() < 2) continue;
    symbol_t receiver = 0;
    for (std::size_t a = 0; a + 1 < mem.size(); a += 2) {
      symbol_t h = mem[a], l = mem[a + 1];
      if (q.prob(h) < q.prob(l)) std::swap(h, l);
      const double amt = 2.0 * s * q.prob(h);
      pmf[h - 1] -= amt;
      pmf[l - 1] += amt;
      if (receiver == 0) receiver = l;
    }
    if (mem.size() % 2 == 1) {
      const symbol_t leftover = mem.back();
      const double amt = 2.0 * s * q.prob(leftover);
      pmf[leftover - 1] -= amt;
      pmf[receiver - 1] += amt;
    }
  }
  DiscreteDistribution p{std::move(pmf)};
  if (tv_distance(p, q) < eps)
    throw error("bucket_perturb_far: fixture cannot reach the requested distance");
  return p;
}

// Far instance that preserves every within-bucket conditional of q exactly:
// an ascending prefix of nonempty buckets is zeroed out until the moved mass
// w passes eps, and the surviving symbols are scaled by 1/(1-w). Only the
// coarse bucket distribution can see it; d_TV(p, q) = w exactly.
inline DiscreteDistribution mass_shift_far(const DiscreteDistribution& q, double eps) {
  if (!(eps > 0.0) || eps > 1.0) throw error("mass_shift_far: eps must be in (0, 1]");
  const BucketPartition part = bucket(q, eps / 100.0, 0.01);
  std::vector<int> nonempty;
  for (int j = 1; j <= part.k(); ++j)
    if (!part.buckets[j].empty()) nonempty.push_back(j);

  const double target = std::min(1.02 * eps, 0.98);
  std::vector<double> pmf = q.pmf();
  double w = 0.0;
  for (std::size_t a = 0; a + 1 < nonempty.size() && w < target; ++a) {
    for (symbol_t i : part.buckets[nonempty[a]]) {
      w += pmf[i - 1];
      pmf[i - 1] = 0.0;
    }
  }
  if (w < eps) throw error("mass_shift_far: fixture cannot reach the requested distance");
  const double scale = 1.0 / (1.0 - w);
  for (double& v : pmf)
    if (v > 0.0) v *= scale;
  return DiscreteDistribution{std::move(pmf)};
}

// (p, q) instance for one trial. For truth = Equal, p is q itself.
inline std::pair<DiscreteDistribution, DiscreteDistribution> make_instance(
    Mode mode, const std::string& fixture, symbol_t n, double eps, Outcome truth, Rng& rng,
    const std::optional<DiscreteDistribution>& explicit_q = std::nullopt) {
  DiscreteDistribution q = [&] {
    if (explicit_q) {
      if (mode != Mode::Identity)
        throw error("make_instance: an explicit q is only supported in identity mode");
      return *explicit_q;
    }
    switch (mode) {
      case Mode::Uniformity:
      case Mode::Equivalence: return uniform(n);
      case Mode::Identity: return linear_tilt(n);
      case Mode::NearUniformIdentity:
        return near_uniform_perturb(n, 1.0 / (100.0 * static_cast<double>(n)), rng);
    }
    throw error("make_instance: bad mode");
  }();
  if (truth == Outcome::Equal) return {q, std::move(q)};

  switch (mode) {
    case Mode::Uniformity:
    case Mode::Equivalence:
      if (fixture == "paninski") return {paninski(n, eps, rng), std::move(q)};
      if (fixture == "spike" && mode == Mode::Uniformity)
        return {permuted(spike(n, eps), rng), std::move(q)};
      break;
    case Mode::Identity:
      if (fixture == "bucket-perturb") return {bucket_perturb_far(q, eps), std::move(q)};
      if (fixture == "mass-shift") return {mass_shift_far(q, eps), std::move(q)};
      break;
    case Mode::NearUniformIdentity:
      if (fixture == "pair-collapse") {
        if (eps > 0.5) throw error("make_instance: pair-collapse supports eps <= 1/2");
        return {pair_collapse(q, eps), std::move(q)};
      }
      break;
  }
  throw error("make_instance: fixture '" + fixture + "' is not valid for mode '" +
              std::string(to_string(mode)) + "'");
}

struct ExperimentSpec {
  Mode mode = Mode::Uniformity;
  symbol_t n = 2;
  double eps = 0.5;
  std::uint64_t trials = 1;  // per side; total records = 2 * trials
  std::uint64_t seed = 0;
  std::string fixture;  // empty -> default_fixture(mode)
  Constants constants;
  int parallel = 1;
  std::optional<DiscreteDistribution> explicit_q;  // identity mode only
};

struct TrialRecord {
  std::uint64_t trial_id = 0;
  std::uint64_t seed = 0;
  Outcome verdict = Outcome::Equal;
  Outcome truth = Outcome::Equal;
  std::uint64_t queries_p = 0;
  std::uint64_t queries_q = 0;
  std::optional<Witness> witness;
  double wall_ms = 0.0;
};

// One per-bucket line of an identity trial (the bucket-level view of
// TrialRecord).
struct BucketRow {
  std::uint64_t trial_id = 0;
  BucketReport report;
};

inline TrialRecord run_single_trial(const ExperimentSpec& spec, std::uint64_t trial_id,
                                    std::vector<BucketRow>* bucket_rows = nullptr) {
  TrialRecord rec;
  rec.trial_id = trial_id;
  rec.seed = derive_seed(spec.seed, Stream::Trial, trial_id);
  rec.truth = trial_id < spec.trials ? Outcome::Equal : Outcome::Far;

  Rng fixture_rng(derive_seed(rec.seed, Stream::Fixture));
  const std::string fixture = spec.fixture.empty() ? default_fixture(spec.mode) : spec.fixture;
  auto [p, q] =
      make_instance(spec.mode, fixture, spec.n, spec.eps, rec.truth, fixture_rng, spec.explicit_q);

  const auto t0 = std::chrono::steady_clock::now();
  switch (spec.mode) {
    case Mode::Uniformity:
    case Mode::NearUniformIdentity: {
      const RunResult run =
          anaconda_run(p, q, uniformity_config(spec.n, spec.eps, spec.constants, rec.seed));
      rec.verdict = run.verdict.outcome;
      rec.witness = run.verdict.witness;
      rec.queries_p = run.queries_p;
      rec.queries_q = run.queries_q;
      break;
    }
    case Mode::Equivalence: {
      const RunResult run =
          anaconda_run(p, q, equivalence_config(spec.n, spec.eps, spec.constants, rec.seed));
      rec.verdict = run.verdict.outcome;
      rec.witness = run.verdict.witness;
      rec.queries_p = run.queries_p;
      rec.queries_q = run.queries_q;
      break;
    }
    case Mode::Identity: {
      const IdentityResult run = identity_test(p, q, spec.eps, spec.constants, rec.seed);
      rec.verdict = run.outcome;
      rec.witness = run.witness;
      rec.queries_p = run.queries_p;
      rec.queries_q = run.queries_q;
      if (bucket_rows)
        for (const BucketReport& b : run.buckets) bucket_rows->push_back({trial_id, b});
      break;
    }
  }
  rec.wall_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  return rec;
}

inline std::vector<TrialRecord> run_trials(const ExperimentSpec& spec,
                                           std::vector<BucketRow>* bucket_rows = nullptr) {
  if (spec.trials < 1) throw error("run_trials: trials must be at least 1");
  const std::uint64_t total = 2 * spec.trials;
  std::vector<TrialRecord> records(total);
  // Per-trial slots keep bucket rows deterministic under threading.
  std::vector<std::vector<BucketRow>> slots(bucket_rows ? total : 0);
  auto slot = [&](std::uint64_t id) { return bucket_rows ? &slots[id] : nullptr; };

  const std::uint64_t workers =
      std::min<std::uint64_t>(std::max(spec.parallel, 1), total);
  if (workers <= 1) {
    for (std::uint64_t id = 0; id < total; ++id)
      records[id] = run_single_trial(spec, id, slot(id));
  } else {
    std::atomic<std::uint64_t> next{0};
    std::atomic<bool> failed{false};
    std::string first_error;
    std::mutex error_mutex;
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::uint64_t w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        while (!failed.load(std::memory_order_relaxed)) {
          const std::uint64_t id = next.fetch_add(1);
          if (id >= total) return;
          try {
            records[id] = run_single_trial(spec, id, slot(id));
          } catch (const std::exception& e) {
            std::lock_guard<std::mutex> lock(error_mutex);
            if (!failed.exchange(true)) first_error = e.what();
            return;
          }
        }
      });
    }
    for (std::thread& t : pool) t.join();
    if (failed) throw error("run_trials: " + first_error);
  }

  if (bucket_rows)
    for (std::vector<BucketRow>& s : slots)
      bucket_rows->insert(bucket_rows->end(), s.begin(), s.end());
  return records;
}

struct SummaryStats {
  std::uint64_t equal_trials = 0;
  std::uint64_t false_far = 0;  // truth equal, verdict far
  std::uint64_t far_trials = 0;
  std::uint64_t false_equal = 0;  // truth far, verdict equal
  WilsonInterval equal_success;
  WilsonInterval far_success;
  double mean_queries_p = 0.0;
  double mean_queries_q = 0.0;
  double total_wall_ms = 0.0;
};

inline SummaryStats summarize(const std::vector<TrialRecord>& records) {
  SummaryStats s;
  double qp = 0.0, qq = 0.0;
  for (const TrialRecord& r : records) {
    if (r.truth == Outcome::Equal) {
      ++s.equal_trials;
      if (r.verdict == Outcome::Far) ++s.false_far;
    } else {
      ++s.far_trials;
      if (r.verdict == Outcome::Equal) ++s.false_equal;
    }
    qp += static_cast<double>(r.queries_p);
    qq += static_cast<double>(r.queries_q);
    s.total_wall_ms += r.wall_ms;
  }
  s.equal_success = wilson_interval(s.equal_trials - s.false_far, s.equal_trials);
  s.far_success = wilson_interval(s.far_trials - s.false_equal, s.far_trials);
  if (!records.empty()) {
    qp /= static_cast<double>(records.size());
    qq /= static_cast<double>(records.size());
  }
  s.mean_queries_p = qp;
  s.mean_queries_q = qq;
  return s;
}

namespace detail {

inline std::string fmt_double(double v) {
  std::ostringstream out;
  out << std::setprecision(17) << v;
  return out.str();
}

}  // namespace detail

inline constexpr const char* kCsvHeader =
    "trial_id,seed,verdict,truth,queries_p,queries_q,witness_t,witness_set_size,"
    "witness_index,witness_gap,wall_ms";

inline void write_csv(std::ostream& out, const std::vector<TrialRecord>& records) {
  out << kCsvHeader << "\n";
  for (const TrialRecord& r : records) {
    out << r.trial_id << ',' << r.seed << ',' << to_string(r.verdict) << ',' << to_string(r.truth)
        << ',' << r.queries_p << ',' << r.queries_q << ',';
    if (r.witness)
      out << r.witness->iteration << ',' << r.witness->set_size << ',' << r.witness->index << ','
          << detail::fmt_double(r.witness->gap);
    else
      out << ",,,";
    out << ',' << detail::fmt_double(r.wall_ms) << "\n";
  }
}

inline constexpr const char* kBucketCsvHeader =
    "trial_id,bucket,size,tested,verdict,queries_p,queries_q,linf_dev,linf_bound";

inline void write_bucket_csv(std::ostream& out, const std::vector<BucketRow>& rows) {
  out << kBucketCsvHeader << "\n";
  for (const BucketRow& r : rows) {
    const BucketReport& b = r.report;
    out << r.trial_id << ',' << b.bucket << ',' << b.size << ',' << (b.tested ? 1 : 0) << ','
        << to_string(b.outcome) << ',' << b.queries_p << ',' << b.queries_q << ','
        << detail::fmt_double(b.linf_dev) << ',' << detail::fmt_double(b.linf_bound) << "\n";
  }
}

inline void write_jsonl(std::ostream& out, const std::vector<TrialRecord>& records) {
  for (const TrialRecord& r : records) {
    nlohmann::json row;
    row["trial_id"] = r.trial_id;
    row["seed"] = r.seed;
    row["verdict"] = to_string(r.verdict);
    row["truth"] = to_string(r.truth);
    row["queries_p"] = r.queries_p;
    row["queries_q"] = r.queries_q;
    if (r.witness) {
      row["witness_t"] = r.witness->iteration;
      row["witness_set_size"] = r.witness->set_size;
      row["witness_index"] = r.witness->index;
      row["witness_gap"] = r.witness->gap;
    } else {
      row["witness_t"] = nullptr;
      row["witness_set_size"] = nullptr;
      row["witness_index"] = nullptr;
      row["witness_gap"] = nullptr;
    }
    row["wall_ms"] = r.wall_ms;
    out << row.dump() << "\n";
  }
}

}  // namespace anaconda
