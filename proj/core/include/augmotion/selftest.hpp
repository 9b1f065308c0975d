#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "augmotion/skeleton.hpp"

namespace augmotion {

struct SelfTestCheck {
  std::string name;
  bool passed = false;
  double measured = 0.0;
  double tolerance = 0.0;
  std::string detail;
};

struct SelfTestReport {
  std::string suite;
  std::vector<SelfTestCheck> checks;

  bool passed() const;
};

/// Uniformly distributed rotation (normalised Gaussian quaternion).
Mat3 random_rotation(std::mt19937_64& rng);

/// Numerical invariants of the biased attention kernel: softmax row sums over
/// input magnitudes 1e-3..1e3, offset coverage of a 2x2x2 grid, the closed-form
/// two-token case, shift invariance, permutation equivariance, weight sharing
/// and a central-difference check of d(output)/dV.
SelfTestReport run_attention_selftest(std::uint64_t seed);

/// Construct-and-recover, proper-rotation and Monte Carlo optimality checks
/// for kabsch().
SelfTestReport run_kabsch_selftest(std::uint64_t seed, std::size_t trials = 1000);

}  // namespace augmotion
