#pragma once

// Sublevel sets Omega = {V_alpha <= M}, the cylinder |x| <= c(alpha, M) that
// contains them, Monte-Carlo measures of Omega inside quasi-balls, and the
// thinness integral  int_Omega |Omega cap B(y, r)|^ell dy.

#include <cstdint>
#include <vector>

#include "srl/htype.hpp"
#include "srl/potential.hpp"

namespace srl {

struct SublevelSpec {
  double alpha = 3.0;
  double M = 0.0;
};

/// V_alpha(p) <= M. The identity counts as V = 0 when alpha >= 2; for
/// alpha < 2 it throws std::domain_error.
bool in_sublevel(const SublevelSpec& spec, const MetivierStructure& s, const GroupPoint& p);

/// Smallest c found such that u^2 inf_{N >= u} (c_a1 N^{2a-4} - c_a2 N^{a-4}) > M
/// for every u > c, so Omega lies in {|x| <= c}. Returns 0 when the lower bound
/// already exceeds M off {x = 0}. Throws std::invalid_argument for alpha <= 2.
double cylinder_radius(const SublevelSpec& spec, const MetivierStructure& s, const ConditionEstimate& est);

struct VolumeEstimate {
  double value = 0.0;
  double std_error = 0.0;
  std::int64_t samples = 0;
  std::int64_t hits = 0;
  double sampled_volume = 0.0;  // Lebesgue measure of the sampling box
};

/// |Omega cap B(center, r)| by uniform sampling of a box that contains the ball
/// (cut down to |x| <= rho when the lower potential bound forces it).
VolumeEstimate ball_intersection_volume(const SublevelSpec& spec, const MetivierStructure& s,
                                        const GroupPoint& center, double r, std::int64_t n_samples,
                                        std::uint64_t seed);

struct ThinnessEstimate {
  double alpha = 0.0;
  double M = 0.0;
  double ell = 0.0;
  double r = 0.0;
  double value = 0.0;
  double std_error = 0.0;
  std::int64_t outer_samples = 0;
  std::int64_t inner_samples = 0;
  double truncation_T = 0.0;
  double cylinder_c = 0.0;
  double threshold_k = 0.0;  // R^2 + (2 c_a2 / c_a1)^{2/alpha}
  double tail_bound = 0.0;   // bound on the part of the integral over |t| > T
  bool divergent = false;    // ell <= m / (n (alpha - 2))
  std::uint64_t seed = 0;
};

/// Requires alpha > 2 and ell > 0.
ThinnessEstimate thinness_integral(const SublevelSpec& spec, const MetivierStructure& s, double r, double ell,
                                   double truncation_T, std::int64_t outer_samples, std::int64_t inner_samples,
                                   std::uint64_t seed);

struct ScalingFit {
  double slope = 0.0;
  double slope_ci_low = 0.0;   // 95% interval, weighted by the Monte-Carlo errors
  double slope_ci_high = 0.0;
  double intercept = 0.0;      // log C(alpha, M, r); reported only
  double threshold_k = 0.0;
  std::vector<double> t_values;
  std::vector<VolumeEstimate> volumes;
};

/// Fit of log |Omega cap B((0, t u_1), r)| against log t. Needs at least four
/// t values; throws std::runtime_error when a volume estimate has no hits.
ScalingFit scaling_fit(const SublevelSpec& spec, const MetivierStructure& s, double r,
                       const std::vector<double>& t_values, std::int64_t samples, std::uint64_t seed);

/// Volume of the Euclidean unit ball in R^d.
double unit_ball_volume(int d);

}  // namespace srl
