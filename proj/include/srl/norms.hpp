#pragma once

#include <cstdint>

#include "srl/htype.hpp"

namespace srl {

/// Kaplan norm N(x,t) = (|x|^4 + 16|t|^2)^{1/4}.
double kaplan_norm(const MetivierStructure& s, const GroupPoint& p);

/// d(p,q) = N(p^{-1} q). Left invariant, symmetric only up to the norm's symmetry.
double quasi_distance(const MetivierStructure& s, const GroupPoint& p, const GroupPoint& q);

/// w_alpha = exp(-N^alpha); throws for alpha <= 0.
double weight(double alpha, const MetivierStructure& s, const GroupPoint& p);

/// Open ball B(center, radius) of the quasi distance.
struct BallSpec {
  GroupPoint center;
  double radius = 1.0;
};

bool in_ball(const MetivierStructure& s, const BallSpec& ball, const GroupPoint& p);

/// Empirical pseudo-triangle constant: max over sampled pairs of
/// N(p.q) / (N(p) + N(q)). Always a lower bound on the true gamma.
struct GammaEstimate {
  double gamma_hat = 1.0;
  std::int64_t samples = 0;
  std::uint64_t seed = 0;
};

GammaEstimate estimate_gamma(const MetivierStructure& s, std::int64_t samples, std::uint64_t seed);

/// N(p.q) / (N(p) + N(q)) for one pair (0 when both are the identity).
double gamma_ratio(const MetivierStructure& s, const GroupPoint& p, const GroupPoint& q);

}  // namespace srl
