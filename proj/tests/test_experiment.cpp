#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "anaconda/calibrate.hpp"
#include "anaconda/config_file.hpp"
#include "anaconda/default_constants.hpp"
#include "anaconda/experiment.hpp"
#include "anaconda/verify.hpp"

using namespace anaconda;
using Catch::Approx;

TEST_CASE("mode names round trip", "[experiment]") {
  for (Mode m : {Mode::Uniformity, Mode::Identity, Mode::Equivalence, Mode::NearUniformIdentity})
    REQUIRE(mode_from_string(to_string(m)) == m);
  REQUIRE_THROWS_AS(mode_from_string("bogus"), error);
  REQUIRE(default_fixture(Mode::Uniformity) == "paninski");
  REQUIRE(default_fixture(Mode::Identity) == "bucket-perturb");
  REQUIRE(default_fixture(Mode::Equivalence) == "paninski");
  REQUIRE(default_fixture(Mode::NearUniformIdentity) == "pair-collapse");
}

TEST_CASE("equal instances are literal copies", "[experiment]") {
  Rng rng(19);
  for (Mode m : {Mode::Uniformity, Mode::Identity, Mode::Equivalence, Mode::NearUniformIdentity}) {
    auto [p, q] = make_instance(m, default_fixture(m), 64, 0.4, Outcome::Equal, rng);
    REQUIRE(p.pmf() == q.pmf());
  }
}

TEST_CASE("far instances hit their advertised distances", "[experiment]") {
  Rng rng(29);
  {
    auto [p, q] = make_instance(Mode::Uniformity, "paninski", 64, 0.4, Outcome::Far, rng);
    REQUIRE(q.pmf() == uniform(64).pmf());
    REQUIRE(tv_distance(p, q) == Approx(0.2).epsilon(1e-12));  // eps/2 by construction
  }
  {
    auto [p, q] = make_instance(Mode::Uniformity, "spike", 64, 0.4, Outcome::Far, rng);
    REQUIRE(tv_distance(p, q) == Approx(0.4).epsilon(1e-12));
  }
  {
    auto [p, q] = make_instance(Mode::Equivalence, "paninski", 64, 0.4, Outcome::Far, rng);
    REQUIRE(tv_distance(p, q) == Approx(0.2).epsilon(1e-12));
  }
  {
    auto [p, q] = make_instance(Mode::Identity, "bucket-perturb", 1024, 0.5, Outcome::Far, rng);
    REQUIRE(q.pmf() == linear_tilt(1024).pmf());
    REQUIRE(tv_distance(p, q) >= 0.5);
    // bucket masses survive exactly
    const BucketPartition part = bucket(q, 0.005, 0.01);
    const ReducedPair red = reduce(p, q, part);
    REQUIRE(tv_distance(red.p_tilde, red.q_tilde) == Approx(0.0).margin(1e-9));
  }
  {
    auto [p, q] = make_instance(Mode::Identity, "mass-shift", 256, 0.4, Outcome::Far, rng);
    REQUIRE(tv_distance(p, q) >= 0.4);
    // surviving buckets keep their conditionals exactly
    const BucketPartition part = bucket(q, 0.004, 0.01);
    for (int j = 1; j <= part.k(); ++j) {
      const auto& mem = part.buckets[j];
      if (mem.size() < 2 || p.mass(QuerySet{std::vector<symbol_t>(mem)}) == 0.0) continue;
      const QuerySet s{std::vector<symbol_t>(mem)};
      const DiscreteDistribution cp = conditional(p, s), cq = conditional(q, s);
      REQUIRE(tv_distance(cp, cq) == Approx(0.0).margin(1e-9));
    }
  }
  {
    auto [p, q] =
        make_instance(Mode::NearUniformIdentity, "pair-collapse", 64, 0.4, Outcome::Far, rng);
    REQUIRE(tv_distance(p, q) >= 0.4);
  }
  REQUIRE_THROWS_AS(make_instance(Mode::Uniformity, "bogus", 64, 0.4, Outcome::Far, rng), error);
  REQUIRE_THROWS_AS(make_instance(Mode::Equivalence, "spike", 64, 0.4, Outcome::Far, rng), error);
  REQUIRE_THROWS_AS(
      make_instance(Mode::NearUniformIdentity, "pair-collapse", 64, 0.6, Outcome::Far, rng),
      error);
  REQUIRE_THROWS_AS(
      make_instance(Mode::Uniformity, "paninski", 64, 0.4, Outcome::Far, rng, uniform(64)), error);
}

TEST_CASE("trials are deterministic and thread-count independent", "[experiment]") {
  ExperimentSpec spec;
  spec.mode = Mode::Uniformity;
  spec.n = 32;
  spec.eps = 0.5;
  spec.trials = 4;
  spec.seed = 321;
  spec.constants = {2.0, 8.0, 0.25, 1.0};

  spec.parallel = 1;
  const std::vector<TrialRecord> serial = run_trials(spec);
  spec.parallel = 3;
  const std::vector<TrialRecord> threaded = run_trials(spec);

  REQUIRE(serial.size() == 8);
  REQUIRE(threaded.size() == 8);
  for (std::size_t i = 0; i < serial.size(); ++i) {
    REQUIRE(serial[i].trial_id == i);
    REQUIRE(serial[i].truth == (i < 4 ? Outcome::Equal : Outcome::Far));
    REQUIRE(serial[i].seed == threaded[i].seed);
    REQUIRE(serial[i].verdict == threaded[i].verdict);
    REQUIRE(serial[i].queries_p == threaded[i].queries_p);
    REQUIRE(serial[i].queries_q == threaded[i].queries_q);
    REQUIRE(serial[i].witness.has_value() == threaded[i].witness.has_value());
    if (serial[i].witness) {
      REQUIRE(serial[i].witness->iteration == threaded[i].witness->iteration);
      REQUIRE(serial[i].witness->index == threaded[i].witness->index);
    }
  }
  // distinct per-trial seeds
  for (std::size_t i = 1; i < serial.size(); ++i) REQUIRE(serial[i].seed != serial[0].seed);
}

TEST_CASE("identity trials emit bucket rows", "[experiment]") {
  ExperimentSpec spec;
  spec.mode = Mode::Identity;
  spec.n = 64;
  spec.eps = 0.4;
  spec.trials = 1;
  spec.seed = 99;
  spec.fixture = "mass-shift";
  spec.constants = {2.0, 8.0, 0.5, 1.0};

  std::vector<BucketRow> rows;
  const std::vector<TrialRecord> records = run_trials(spec, &rows);
  REQUIRE(records.size() == 2);
  REQUIRE_FALSE(rows.empty());
  // rows arrive grouped by trial in trial order
  std::uint64_t last = 0;
  for (const BucketRow& r : rows) {
    REQUIRE(r.trial_id >= last);
    last = r.trial_id;
    REQUIRE(r.report.bucket >= 1);
  }
}

TEST_CASE("summaries count errors per side", "[experiment]") {
  std::vector<TrialRecord> records(6);
  for (std::size_t i = 0; i < 6; ++i) {
    records[i].truth = i < 3 ? Outcome::Equal : Outcome::Far;
    records[i].verdict = records[i].truth;
    records[i].queries_p = 10;
    records[i].queries_q = 20;
  }
  records[1].verdict = Outcome::Far;    // false far
  records[4].verdict = Outcome::Equal;  // false equal
  records[5].verdict = Outcome::Equal;  // false equal

  const SummaryStats s = summarize(records);
  REQUIRE(s.equal_trials == 3);
  REQUIRE(s.false_far == 1);
  REQUIRE(s.far_trials == 3);
  REQUIRE(s.false_equal == 2);
  REQUIRE(s.mean_queries_p == Approx(10.0));
  REQUIRE(s.mean_queries_q == Approx(20.0));
  REQUIRE(s.equal_success.lower == Approx(wilson_interval(2, 3).lower));
  REQUIRE(s.far_success.upper == Approx(wilson_interval(1, 3).upper));
}

TEST_CASE("csv records match the golden shape", "[experiment]") {
  std::vector<TrialRecord> records(2);
  records[0] = {1, 7, Outcome::Equal, Outcome::Far, 3, 4, std::nullopt, 0.5};
  records[1] = {3, 42, Outcome::Far, Outcome::Equal, 7, 8, Witness{2, 5, 9, 0.25}, 1.5};

  std::ostringstream out;
  write_csv(out, records);
  std::istringstream in(out.str());
  std::string line;
  std::getline(in, line);
  REQUIRE(line == std::string(kCsvHeader));
  REQUIRE(line == "trial_id,seed,verdict,truth,queries_p,queries_q,witness_t,witness_set_size,"
                  "witness_index,witness_gap,wall_ms");
  std::getline(in, line);
  REQUIRE(line == "1,7,equal,far,3,4,,,,,0.5");
  std::getline(in, line);
  REQUIRE(line == "3,42,far,equal,7,8,2,5,9,0.25,1.5");
  REQUIRE_FALSE(std::getline(in, line));
}

TEST_CASE("jsonl records parse back with the right fields", "[experiment]") {
  std::vector<TrialRecord> records(2);
  records[0] = {0, 7, Outcome::Equal, Outcome::Equal, 3, 4, std::nullopt, 0.5};
  records[1] = {1, 42, Outcome::Far, Outcome::Far, 7, 8, Witness{2, 5, 9, 0.25}, 1.5};

  std::ostringstream out;
  write_jsonl(out, records);
  std::istringstream in(out.str());
  std::string line;

  REQUIRE(std::getline(in, line));
  nlohmann::json row = nlohmann::json::parse(line);
  REQUIRE(row["trial_id"] == 0);
  REQUIRE(row["verdict"] == "equal");
  REQUIRE(row["witness_t"].is_null());
  REQUIRE(row["witness_gap"].is_null());

  REQUIRE(std::getline(in, line));
  row = nlohmann::json::parse(line);
  REQUIRE(row["truth"] == "far");
  REQUIRE(row["witness_t"] == 2);
  REQUIRE(row["witness_set_size"] == 5);
  REQUIRE(row["witness_index"] == 9);
  REQUIRE(row["witness_gap"] == Approx(0.25));
  REQUIRE(row["queries_p"] == 7);
}

TEST_CASE("bucket csv rows match the golden shape", "[experiment]") {
  BucketRow row;
  row.trial_id = 2;
  row.report = {5, 3, true, Outcome::Far, 10, 12, 0.001, 0.25};
  std::ostringstream out;
  write_bucket_csv(out, {row});
  std::istringstream in(out.str());
  std::string line;
  std::getline(in, line);
  REQUIRE(line == std::string(kBucketCsvHeader));
  std::getline(in, line);
  REQUIRE(line == "2,5,3,1,far,10,12,0.001,0.25");
}

TEST_CASE("constants files round trip and reject typos", "[experiment]") {
  const std::string path = "test_constants_roundtrip.conf";
  const Constants c{3.5, 17.0, 0.375, 2.0};
  save_constants(path, c, 12345);
  const ConstantsFile back = load_constants(path);
  REQUIRE(back.constants.c_T == Approx(3.5));
  REQUIRE(back.constants.c_m == Approx(17.0));
  REQUIRE(back.constants.c_eps == Approx(0.375));
  REQUIRE(back.constants.c_b == Approx(2.0));
  REQUIRE(back.seed.has_value());
  REQUIRE(*back.seed == 12345);
  std::remove(path.c_str());

  auto expect_error = [](const std::string& body, const std::string& needle) {
    const std::string tmp = "test_constants_bad.conf";
    {
      std::ofstream out(tmp);
      out << body;
    }
    bool threw = false;
    try {
      load_constants(tmp);
    } catch (const error& e) {
      threw = true;
      REQUIRE(std::string(e.what()).find(needle) != std::string::npos);
    }
    std::remove(tmp.c_str());
    REQUIRE(threw);
  };
  expect_error("c_T = 1\nc_Q = 2\n", "unknown key");
  expect_error("c_T = 1\nc_T = 2\n", "duplicate key");
  expect_error("c_T = 1\nc_m\n", ":2");  // missing '=' reports the line
  expect_error("c_T = abc\n", "not a number");
  expect_error("c_T = 1x\n", "trailing");
  expect_error("seed = -4\n", "unsigned");
  expect_error("c_T =\n", "empty value");
  REQUIRE_THROWS_AS(load_constants("no_such.conf"), error);

  // comments and blanks are fine; omitted keys keep struct defaults
  {
    std::ofstream out("test_constants_partial.conf");
    out << "# just one override\n\nc_m = 99 # trailing comment\n";
  }
  const ConstantsFile partial = load_constants("test_constants_partial.conf");
  REQUIRE(partial.constants.c_m == Approx(99.0));
  REQUIRE(partial.constants.c_T == Approx(Constants{}.c_T));
  REQUIRE_FALSE(partial.seed.has_value());
  std::remove("test_constants_partial.conf");
}

TEST_CASE("shipped default constants load from the checked-in files", "[experiment]") {
  auto check = [](const char* path, const Constants& expect) {
    const ConstantsFile file = load_constants(path);
    REQUIRE(file.constants.c_T == Approx(expect.c_T));
    REQUIRE(file.constants.c_m == Approx(expect.c_m));
    REQUIRE(file.constants.c_eps == Approx(expect.c_eps));
    REQUIRE(file.constants.c_b == Approx(expect.c_b));
  };
  check("configs/uniformity.conf", default_constants(Mode::Uniformity));
  check("configs/equivalence.conf", default_constants(Mode::Equivalence));
  check("configs/identity.conf", default_constants(Mode::Identity));
}

TEST_CASE("verify dispatcher knows its lemma names", "[experiment]") {
  REQUIRE_THROWS_AS(verify_lemma("not-a-check", 0), error);
  REQUIRE(kLemmaNames.size() == 6);
}

TEST_CASE("calibration walks the grid cheapest-first within budget", "[experiment]") {
  REQUIRE_THROWS_AS(calibration_grid(Mode::Identity), error);
  REQUIRE_THROWS_AS(calibrate(Mode::Uniformity, 16, 0.5, 1.5, 100, 0), error);

  const CalibrationResult res =
      calibrate(Mode::Uniformity, 16, 0.5, 0.5, 600, 1234, "spike", 1, 5, 20);
  REQUIRE(res.mode == Mode::Uniformity);
  REQUIRE(res.n == 16);
  REQUIRE(res.budget == 600);
  REQUIRE(res.trials_used <= res.budget);
  REQUIRE_FALSE(res.attempts.empty());
  for (std::size_t i = 1; i < res.attempts.size(); ++i)
    REQUIRE(res.attempts[i - 1].cost <= res.attempts[i].cost);
  for (const CalibrationAttempt& a : res.attempts) {
    REQUIRE(a.trials_used > 0);
    if (!a.screened) REQUIRE_FALSE(a.confirmed);
  }
  if (res.found) {
    const CalibrationAttempt& last = res.attempts.back();
    REQUIRE(last.confirmed);
    REQUIRE(last.constants.c_T == Approx(res.best.c_T));
    REQUIRE(last.equal_ci.lower >= 0.5);
    REQUIRE(last.far_ci.lower >= 0.5);
  }
}
