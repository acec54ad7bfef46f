#pragma once

// Seeded randomness utilities. All stochastic code in the library draws from
// Rng so that a run is fully determined by one root seed. Independent streams
// (planner, each oracle, fixture construction, ...) are derived from the root
// via derive_seed(root, tag, index); the derivation is splitmix64 mixing, so
// streams for distinct (tag, index) pairs are decorrelated.

#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace anaconda {

struct error : std::runtime_error {
  explicit error(const std::string& what) : std::runtime_error(what) {}
};

inline std::uint64_t splitmix64(std::uint64_t& state) {
  state += 0x9E3779B97F4A7C15ull;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

enum class Stream : std::uint64_t {
  Planner = 1,
  OracleP = 2,
  OracleQ = 3,
  Fixture = 4,
  Samp = 5,
  Trial = 6,
  Boost = 7,
  Bucket = 8,
  Verify = 9,
  Calibrate = 10,
};

inline std::uint64_t derive_seed(std::uint64_t root, Stream tag, std::uint64_t index = 0) {
  std::uint64_t state = root;
  splitmix64(state);
  state ^= static_cast<std::uint64_t>(tag) * 0xBF58476D1CE4E5B9ull;
  splitmix64(state);
  state ^= index * 0x94D049BB133111EBull;
  return splitmix64(state);
}

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  // uniform in [0, 1), 53-bit resolution
  double next_double() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  // unbiased uniform in [0, k)
  std::uint64_t below(std::uint64_t k) {
    if (k == 0) throw error("Rng::below: k must be positive");
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % k;
    std::uint64_t r;
    do {
      r = engine_();
    } while (r >= limit);
    return r % k;
  }

  bool bernoulli(double p) { return next_double() < p; }

  // Number of Bernoulli(p) failures before the next success; lets callers
  // skip-sample sparse inclusion without touching every element.
  std::uint64_t geometric_skips(double p) {
    if (p >= 1.0) return 0;
    if (p <= 0.0) throw error("Rng::geometric_skips: p must be positive");
    const double u = 1.0 - next_double();  // (0, 1]
    return static_cast<std::uint64_t>(std::floor(std::log(u) / std::log1p(-p)));
  }

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::swap(v[i - 1], v[static_cast<std::size_t>(below(i))]);
    }
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace anaconda
