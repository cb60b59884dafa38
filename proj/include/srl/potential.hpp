#pragma once

// Closed-form horizontal calculus of the Kaplan norm and of the weights
// w_alpha = exp(-N^alpha), and the Schrodinger potential
//   V_alpha = -1/4 |grad_H w|^2 / w^2 - 1/2 (L w) / w,   L = -sum_j X_j^2,
// obtained by conjugating the weighted sub-Laplacian with f -> f sqrt(w).
//
// Every formula carries a factor |x|^2; at x = 0 (off the identity) values are
// the continuous extension 0. The identity itself is rejected with
// std::domain_error.

#include <cstdint>
#include <span>
#include <vector>

#include "srl/htype.hpp"

namespace srl {

/// X_j N for j = 1..2n: (|x|^2 x + 4 J_t x) / N^3.
HorizontalVector grad_norm(const MetivierStructure& s, const GroupPoint& p);

/// |grad_H N|^2 = |x|^2/N^6 (|x|^4 + 16 |t|^2 |J_{sign t} sign x|^2).
double grad_norm_sq(const MetivierStructure& s, const GroupPoint& p);

/// L N = 3/N |grad_H N|^2 - |x|^2/N^3 (2 + 2n + 2 sum_k |J_k sign x|^2).
double sub_laplacian_norm(const MetivierStructure& s, const GroupPoint& p);

/// grad_H w_alpha = -alpha w_alpha N^{alpha-1} grad_H N.
HorizontalVector grad_weight(double alpha, const MetivierStructure& s, const GroupPoint& p);

/// L w_alpha = w_alpha [-alpha^2 N^{2alpha-2} |grad N|^2 + alpha(alpha-1) N^{alpha-2} |grad N|^2
///                      - alpha N^{alpha-1} L N].
double laplacian_weight(double alpha, const MetivierStructure& s, const GroupPoint& p);

/// V_alpha = 1/4 a^2 N^{2a-2} |grad N|^2 - 1/2 a(a-1) N^{a-2} |grad N|^2 + 1/2 a N^{a-1} L N.
double potential_value(double alpha, const MetivierStructure& s, const GroupPoint& p);

/// H-type closed form (a^2/4) N^{2a-4}|x|^2 - (a/2)(Q+a-2) N^{a-4}|x|^2.
double potential_htype_closed_form(double alpha, const MetivierStructure& s, const GroupPoint& p);

struct PotentialConstants {
  double c0 = 0.0;
  double C0 = 0.0;
  double c = 0.0;  // min(c0, 1)
  double C = 0.0;  // max(C0, 1)
  double c_a1 = 0.0;
  double c_a2 = 0.0;
  double c_a3 = 0.0;
  double c_a4 = 0.0;  // sign unconstrained
  double alpha = 0.0;
  int Q = 0;
};

/// Constants of the two-sided bound
///   N^{2a-4}|x|^2 (c_a1 - c_a2/N^a) <= V_a <= N^{2a-4}|x|^2 (c_a3 - c_a4/N^a).
/// H-type structures use the exact c0 = C0 = 1. Throws when c0 = 0.
PotentialConstants potential_bounds(double alpha, const ConditionEstimate& est, const MetivierStructure& s);

struct SandwichBounds {
  double lower = 0.0;
  double upper = 0.0;
};

SandwichBounds sandwich_bounds(const PotentialConstants& k, const MetivierStructure& s, const GroupPoint& p);

struct SandwichViolation {
  std::size_t index = 0;
  double lower_margin = 0.0;  // V - lower
  double upper_margin = 0.0;  // upper - V
};

struct SandwichReport {
  std::size_t checked = 0;
  std::vector<SandwichViolation> violations;
  double min_lower_margin = 0.0;
  double min_upper_margin = 0.0;
  double max_lower_margin = 0.0;  // largest slack, 0 when the bound is tight
  double max_upper_margin = 0.0;
};

/// Margins are judged against tol * (1 + |V|).
SandwichReport check_sandwich(const PotentialConstants& k, const MetivierStructure& s,
                              std::span<const GroupPoint> points, double tol = 1e-10);

/// inf over N > 0 of min(0, c_a1 N^{2a-2} - c_a2 N^{a-2}): a lower bound for
/// V_alpha (take |x| <= N in the lower sandwich bound). -inf for alpha < 2.
double analytic_floor(const PotentialConstants& k);

/// Points delta_r(direction) for log-spaced r; directions include the
/// coordinate axes of x and t plus seeded random ones.
std::vector<GroupPoint> graded_cloud(const MetivierStructure& s, double r_min, double r_max, int radii,
                                     int directions, std::uint64_t seed);

struct InfEstimate {
  double sampled_min = 0.0;
  double analytic_floor = 0.0;  // -inf when alpha < 2
  bool unbounded_below = false;
  double sentinel = -1e6;
};

InfEstimate essential_inf_estimate(double alpha, const MetivierStructure& s, std::span<const GroupPoint> cloud,
                                   const ConditionEstimate& est, double sentinel = -1e6);

struct ShellProbe {
  double radius = 0.0;
  double grad_sup = 0.0;       // sup |grad_H w_a| on the Kaplan sphere of this radius
  double laplacian_sup = 0.0;  // sup |L w_a|
  double ratio_sup = 0.0;      // sup |grad_H w_a| / ((1 + N) w_a)
};

/// Numerical probe of the two hypotheses of the self-adjointness criterion:
///   (a) grad_H w in L^inf_loc and L w in L^Q_loc,
///   (b) grad_H w in L^inf_loc and grad_H w / ((1+N) w) in L^inf.
/// Local behaviour is read off shells shrinking to the identity, global
/// behaviour off shells growing to infinity, through log-log growth exponents.
struct AdmissibilityReport {
  double alpha = 0.0;
  std::vector<ShellProbe> inner;  // radii decreasing
  std::vector<ShellProbe> outer;  // radii increasing
  double grad_exponent_local = 0.0;       // sup|grad w| ~ r^e as r -> 0
  double laplacian_exponent_local = 0.0;  // sup|L w| ~ r^e as r -> 0
  double ratio_exponent_local = 0.0;
  double ratio_exponent_global = 0.0;     // as r -> infinity
  bool grad_locally_bounded = false;
  bool laplacian_locally_lq = false;
  bool ratio_bounded = false;
  bool condition_a = false;
  bool condition_b = false;
};

AdmissibilityReport admissibility_report(double alpha, const MetivierStructure& s, int directions = 256,
                                         std::uint64_t seed = 0);

}  // namespace srl
