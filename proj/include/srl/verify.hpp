#pragma once

// Randomized invariant suite for a structure: group law, dilations, the
// Kaplan norm, left invariance of the horizontal calculus, and the potential
// formulas.

#include <cstdint>
#include <string>
#include <vector>

#include "srl/htype.hpp"

namespace srl {

struct CheckResult {
  std::string name;
  bool passed = false;
  double worst = 0.0;      // largest observed error (or violation count)
  double tolerance = 0.0;
  std::int64_t samples = 0;
};

std::vector<CheckResult> run_invariant_suite(const MetivierStructure& s, std::int64_t points, std::uint64_t seed);

/// Random point with coordinates uniform in [-scale, scale].
GroupPoint random_point(const MetivierStructure& s, std::uint64_t seed, std::uint64_t index, double scale = 2.0);

}  // namespace srl
