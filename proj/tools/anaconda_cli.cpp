// anaconda: conditional-sampling testers for discrete distributions.
//
// Subcommands:
//   test-uniformity / test-identity / test-equivalence  -- Monte Carlo trial
//       batches over equal and far instance pairs, with per-trial records
//   verify     -- empirical checks of the structural facts the tester rests on
//   calibrate  -- grid search for the cheapest constants meeting a target
//
// Exit codes: 0 pass, 1 statistical fail, 2 usage/configuration error.

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"

#include "anaconda/calibrate.hpp"
#include "anaconda/config_file.hpp"
#include "anaconda/default_constants.hpp"
#include "anaconda/distribution.hpp"
#include "anaconda/experiment.hpp"
#include "anaconda/verify.hpp"

namespace {

constexpr std::uint64_t kDefaultSeed = 20260826;

int default_parallel() {
  return static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
}

struct TestOpts {
  std::uint32_t n = 1024;
  double eps = 0.5;
  std::uint64_t trials = 100;
  std::uint64_t seed = kDefaultSeed;
  double target = 2.0 / 3.0;
  std::string fixture;
  std::string constants_path;
  std::string out;
  std::string format = "csv";
  int parallel = default_parallel();
  std::string q_file;         // identity only
  std::string bucket_report;  // identity only
};

void add_common_test_flags(CLI::App* sc, TestOpts& o) {
  sc->add_option("--n", o.n, "domain size")->check(CLI::Range(2u, 1u << 24));
  sc->add_option("--eps", o.eps, "distance parameter, in (0, 1]")->check(CLI::Range(1e-9, 1.0));
  sc->add_option("--trials", o.trials, "trials per side (equal and far)")
      ->check(CLI::PositiveNumber);
  sc->add_option("--seed", o.seed, "root seed; every trial derives from it");
  sc->add_option("--target", o.target,
                 "per-side success rate the Wilson 95% lower bound must clear")
      ->check(CLI::Range(1e-9, 0.999999));
  sc->add_option("--fixture", o.fixture, "far-instance family (default depends on mode)");
  sc->add_option("--constants", o.constants_path, "key = value constants file")
      ->check(CLI::ExistingFile);
  sc->add_option("--out", o.out, "write per-trial records here ('-' for stdout)");
  sc->add_option("--format", o.format, "record format for --out")
      ->check(CLI::IsMember({"csv", "jsonl"}));
  sc->add_option("--parallel", o.parallel, "worker threads")->check(CLI::PositiveNumber);
}

void write_records(const std::string& out, const std::string& format,
                   const std::vector<anaconda::TrialRecord>& records) {
  if (out.empty()) return;
  auto emit = [&](std::ostream& os) {
    if (format == "jsonl")
      anaconda::write_jsonl(os, records);
    else
      anaconda::write_csv(os, records);
  };
  if (out == "-") {
    emit(std::cout);
    return;
  }
  std::ofstream os(out);
  if (!os) throw anaconda::error("cannot open '" + out + "' for writing");
  emit(os);
}

void write_bucket_report(const std::string& out, const std::vector<anaconda::BucketRow>& rows) {
  if (out.empty()) return;
  if (out == "-") {
    anaconda::write_bucket_csv(std::cout, rows);
    return;
  }
  std::ofstream os(out);
  if (!os) throw anaconda::error("cannot open '" + out + "' for writing");
  anaconda::write_bucket_csv(os, rows);
}

void print_constants_line(const anaconda::Constants& c) {
  std::cout << "constants: c_T=" << c.c_T << " c_m=" << c.c_m << " c_eps=" << c.c_eps
            << " c_b=" << c.c_b << "\n";
}

void print_spec(const anaconda::ExperimentSpec& spec) {
  std::cout << "mode=" << anaconda::to_string(spec.mode) << " n=" << spec.n << " eps=" << spec.eps
            << " trials=" << spec.trials << "/side seed=" << spec.seed << " fixture="
            << (spec.fixture.empty() ? anaconda::default_fixture(spec.mode) : spec.fixture)
            << "\n";
  print_constants_line(spec.constants);
  if (spec.mode == anaconda::Mode::Identity) {
    std::cout << "derived: bucketed identity test, tau=" << spec.eps / 100.0
              << " (inner near-uniform tester uses the constants above)\n";
  } else {
    const anaconda::AnacondaConfig cfg =
        anaconda::mode_config(spec.mode, spec.n, spec.eps, spec.constants, 0);
    std::cout << "derived: T=" << cfg.T << " m=" << cfg.m << " eps'=" << cfg.eps_prime
              << " j_range=" << cfg.j_range_max << " queries/oracle=" << cfg.T * cfg.m << "\n";
  }
}

int print_summary(const anaconda::SummaryStats& s, double target) {
  auto side = [](const char* name, std::uint64_t trials, std::uint64_t errors,
                 const anaconda::WilsonInterval& ci) {
    const double rate =
        trials == 0 ? 0.0 : 1.0 - static_cast<double>(errors) / static_cast<double>(trials);
    std::cout << "  " << std::left << std::setw(6) << name << " trials=" << trials
              << " errors=" << errors << " success=" << std::fixed << std::setprecision(4) << rate
              << " wilson95=[" << ci.lower << ", " << ci.upper << "]"
              << std::defaultfloat << std::setprecision(6) << "\n";
  };
  side("equal", s.equal_trials, s.false_far, s.equal_success);
  side("far", s.far_trials, s.false_equal, s.far_success);
  std::cout << "  mean queries/trial: p=" << s.mean_queries_p << " q=" << s.mean_queries_q
            << "  wall=" << s.total_wall_ms / 1000.0 << "s\n";
  const bool pass = s.equal_success.lower >= target && s.far_success.lower >= target;
  std::cout << (pass ? "PASS" : "FAIL") << " (both Wilson 95% lower bounds vs target " << target
            << ")\n";
  return pass ? 0 : 1;
}

int run_test_command(anaconda::Mode mode, const TestOpts& o, bool n_given, bool seed_given) {
  anaconda::ExperimentSpec spec;
  spec.mode = mode;
  spec.n = o.n;
  spec.eps = o.eps;
  spec.trials = o.trials;
  spec.seed = o.seed;
  spec.fixture = o.fixture;
  spec.parallel = o.parallel;
  if (o.constants_path.empty()) {
    spec.constants = anaconda::default_constants(mode);
  } else {
    const anaconda::ConstantsFile file = anaconda::load_constants(o.constants_path);
    spec.constants = file.constants;
    if (file.seed && !seed_given) spec.seed = *file.seed;
  }
  if (!o.q_file.empty()) {
    anaconda::DiscreteDistribution q = anaconda::from_file(o.q_file);
    if (n_given && q.n() != o.n)
      throw anaconda::error("--n=" + std::to_string(o.n) + " conflicts with --q-file domain size " +
                            std::to_string(q.n()));
    spec.n = q.n();
    spec.explicit_q = std::move(q);
  }

  print_spec(spec);
  std::vector<anaconda::BucketRow> bucket_rows;
  const std::vector<anaconda::TrialRecord> records =
      anaconda::run_trials(spec, o.bucket_report.empty() ? nullptr : &bucket_rows);
  write_records(o.out, o.format, records);
  write_bucket_report(o.bucket_report, bucket_rows);
  return print_summary(anaconda::summarize(records), o.target);
}

int run_verify(const std::string& lemma, std::uint64_t seed) {
  std::vector<anaconda::LemmaReport> reports;
  if (lemma == "all") {
    for (const char* name : anaconda::kLemmaNames) {
      const auto batch = anaconda::verify_lemma(name, seed);
      reports.insert(reports.end(), batch.begin(), batch.end());
    }
  } else {
    reports = anaconda::verify_lemma(lemma, seed);
  }

  bool all_pass = true;
  for (const anaconda::LemmaReport& r : reports) {
    all_pass = all_pass && r.passed;
    std::cout << std::left << std::setw(16) << r.name << std::setw(34) << r.fixture
              << std::right << " observed=" << std::fixed << std::setprecision(5) << r.observed
              << (r.bound == anaconda::Bound::AtLeast ? " >= " : " <= ")
              << std::setprecision(5) << r.threshold << "  ci=[" << r.ci.lower << ", "
              << r.ci.upper << "]" << std::defaultfloat << std::setprecision(6) << "  draws="
              << r.draws << "  " << (r.passed ? "pass" : "FAIL") << "  ("
              << std::fixed << std::setprecision(1) << r.wall_ms / 1000.0 << "s)"
              << std::defaultfloat << std::setprecision(6) << "\n";
    if (!r.detail.empty()) std::cout << "    " << r.detail << "\n";
  }
  std::cout << (all_pass ? "VERIFY PASS" : "VERIFY FAIL") << " (" << reports.size() << " checks)\n";
  return all_pass ? 0 : 1;
}

int run_calibrate(const std::string& mode_name, std::uint32_t n, double eps, double target,
                  std::uint64_t budget, std::uint64_t seed, const std::string& fixture,
                  int parallel, std::uint64_t screen_trials, std::uint64_t confirm_trials,
                  const std::string& out) {
  const anaconda::Mode mode = anaconda::mode_from_string(mode_name);
  const anaconda::CalibrationResult res = anaconda::calibrate(
      mode, n, eps, target, budget, seed, fixture, parallel, screen_trials, confirm_trials);

  std::size_t idx = 0;
  for (const anaconda::CalibrationAttempt& a : res.attempts) {
    ++idx;
    std::cout << "[" << idx << "] c_T=" << a.constants.c_T << " c_m=" << a.constants.c_m
              << " c_eps=" << a.constants.c_eps << "  T=" << a.T << " m=" << a.m
              << " eps'=" << a.eps_prime << " cost=" << a.cost << "  equal=" << std::fixed
              << std::setprecision(3) << a.equal_rate << " far=" << a.far_rate
              << std::defaultfloat << std::setprecision(6) << "  "
              << (a.confirmed ? "confirmed"
                              : (a.screened ? "screened, confirm missed" : "screened out"))
              << " (" << a.trials_used << " trials)\n";
  }
  std::cout << "trials used: " << res.trials_used << "/" << res.budget << "\n";
  if (!res.found) {
    std::cout << "CALIBRATE FAIL: no grid point confirmed within budget\n";
    return 1;
  }
  std::cout << "CALIBRATE PASS: ";
  print_constants_line(res.best);
  if (!out.empty()) {
    anaconda::save_constants(out, res.best);
    std::cout << "wrote " << out << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"conditional-sampling testers for discrete distributions"};
  app.require_subcommand(1);

  TestOpts uni, ident, equiv;
  CLI::App* sc_uni =
      app.add_subcommand("test-uniformity", "test p against the uniform distribution");
  add_common_test_flags(sc_uni, uni);
  CLI::App* sc_ident =
      app.add_subcommand("test-identity", "test p against a known distribution q");
  add_common_test_flags(sc_ident, ident);
  sc_ident->add_option("--q-file", ident.q_file, "text file with one probability per line")
      ->check(CLI::ExistingFile);
  sc_ident->add_option("--bucket-report", ident.bucket_report,
                       "write per-bucket rows here ('-' for stdout)");
  CLI::App* sc_equiv =
      app.add_subcommand("test-equivalence", "test two unknown distributions for equality");
  add_common_test_flags(sc_equiv, equiv);

  std::string lemma = "all";
  std::uint64_t verify_seed = kDefaultSeed;
  CLI::App* sc_verify =
      app.add_subcommand("verify", "empirical checks of the structural facts behind the tester");
  sc_verify->add_option("--lemma", lemma, "which check to run")
      ->check(CLI::IsMember({"all", "discrepant-set", "uniform-key", "rest-signal", "rest-noise",
                             "appendix-a", "dkw"}));
  sc_verify->add_option("--seed", verify_seed, "root seed");

  std::string cal_mode = "uniformity";
  std::uint32_t cal_n = 1024;
  double cal_eps = 0.5;
  double cal_target = 2.0 / 3.0;
  std::uint64_t cal_budget = 40000;
  std::uint64_t cal_seed = kDefaultSeed;
  std::string cal_fixture;
  int cal_parallel = default_parallel();
  std::uint64_t cal_screen = 40;
  std::uint64_t cal_confirm = 160;
  std::string cal_out;
  CLI::App* sc_cal =
      app.add_subcommand("calibrate", "search the constant grid for the cheapest passing point");
  sc_cal->add_option("--mode", cal_mode, "tester to calibrate")
      ->check(CLI::IsMember({"uniformity", "equivalence", "identity", "near-uniform-identity"}));
  sc_cal->add_option("--n", cal_n, "domain size")->check(CLI::Range(2u, 1u << 24));
  sc_cal->add_option("--eps", cal_eps, "distance parameter")->check(CLI::Range(1e-9, 1.0));
  sc_cal->add_option("--target", cal_target, "per-side success target")
      ->check(CLI::Range(1e-9, 0.999999));
  sc_cal->add_option("--budget", cal_budget, "total trial budget")->check(CLI::PositiveNumber);
  sc_cal->add_option("--seed", cal_seed, "root seed");
  sc_cal->add_option("--fixture", cal_fixture, "far-instance family");
  sc_cal->add_option("--parallel", cal_parallel, "worker threads")->check(CLI::PositiveNumber);
  sc_cal->add_option("--screen-trials", cal_screen, "per-side trials in the screening batch")
      ->check(CLI::PositiveNumber);
  sc_cal->add_option("--confirm-trials", cal_confirm, "per-side trials in the confirmation batch")
      ->check(CLI::PositiveNumber);
  sc_cal->add_option("--out", cal_out, "write the confirmed constants file here");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (sc_uni->parsed())
      return run_test_command(anaconda::Mode::Uniformity, uni, sc_uni->count("--n") > 0,
                              sc_uni->count("--seed") > 0);
    if (sc_ident->parsed())
      return run_test_command(anaconda::Mode::Identity, ident, sc_ident->count("--n") > 0,
                              sc_ident->count("--seed") > 0);
    if (sc_equiv->parsed())
      return run_test_command(anaconda::Mode::Equivalence, equiv, sc_equiv->count("--n") > 0,
                              sc_equiv->count("--seed") > 0);
    if (sc_verify->parsed()) return run_verify(lemma, verify_seed);
    if (sc_cal->parsed())
      return run_calibrate(cal_mode, cal_n, cal_eps, cal_target, cal_budget, cal_seed, cal_fixture,
                           cal_parallel, cal_screen, cal_confirm, cal_out);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}
