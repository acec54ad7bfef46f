#pragma once

// Calibrated tester constants shipped with the repo. Each set is the output
// of `anaconda calibrate` at the stated operating point (see configs/ for the
// equivalent loadable files); regenerate with the commands in the README.

#include "anaconda/experiment.hpp"

namespace anaconda {

// calibrate --mode uniformity --n 1024 --eps 0.5 --target 0.8 --seed 101
inline constexpr Constants kUniformityDefaults{2.0, 16.0, 0.25, 1.0};

// calibrate --mode equivalence --n 256 --eps 0.5 --target 0.85 --seed 102
inline constexpr Constants kEquivalenceDefaults{1e-4, 2e-4, 128.0, 1.0};

// Inner constants for the per-bucket near-uniform tester inside the identity
// reduction: calibrate --mode near-uniform-identity --n 32 --eps 0.25
// --target 0.9 --seed 103 (bucket scale; the boosted majority vote supplies
// the rest of the confidence).
inline constexpr Constants kIdentityDefaults{2.0, 8.0, 0.375, 1.0};

inline Constants default_constants(Mode mode) {
  switch (mode) {
    case Mode::Uniformity: return kUniformityDefaults;
    case Mode::Equivalence: return kEquivalenceDefaults;
    case Mode::Identity:
    case Mode::NearUniformIdentity: return kIdentityDefaults;
  }
  throw error("default_constants: bad mode");
}

}  // namespace anaconda
