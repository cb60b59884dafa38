#include "srl/potential.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "srl/norms.hpp"
#include "srl/sampling.hpp"

namespace srl {

namespace {

double require_off_identity(const MetivierStructure& s, const GroupPoint& p) {
  const double N = kaplan_norm(s, p);
  if (N == 0.0) throw std::domain_error("formula undefined at the identity");
  return N;
}

template <class Vector>
Vector sign_of(const Vector& v) {
  const double norm = v.norm();
  if (norm == 0.0) return Vector::Zero(v.size());
  return v / norm;
}

void require_alpha(double alpha) {
  if (!(alpha > 0.0)) throw std::invalid_argument("alpha must be positive");
}

}  // namespace

HorizontalVector grad_norm(const MetivierStructure& s, const GroupPoint& p) {
  const double N = require_off_identity(s, p);
  const double x2 = p.x.squaredNorm();
  return (x2 * p.x + 4.0 * (s.map_at(p.t) * p.x)) / (N * N * N);
}

double grad_norm_sq(const MetivierStructure& s, const GroupPoint& p) {
  const double N = require_off_identity(s, p);
  const double x2 = p.x.squaredNorm();
  if (x2 == 0.0) return 0.0;
  const double t2 = p.t.squaredNorm();
  const double mixed = (s.map_at(sign_of(p.t)) * sign_of(p.x)).squaredNorm();
  const double N2 = N * N;
  return x2 / (N2 * N2 * N2) * (x2 * x2 + 16.0 * t2 * mixed);
}

double sub_laplacian_norm(const MetivierStructure& s, const GroupPoint& p) {
  const double N = require_off_identity(s, p);
  const double x2 = p.x.squaredNorm();
  if (x2 == 0.0) return 0.0;
  const HorizontalVector xhat = sign_of(p.x);
  double sum = 0.0;
  for (int k = 0; k < s.m(); ++k) sum += (s.map(k) * xhat).squaredNorm();
  return 3.0 / N * grad_norm_sq(s, p) - x2 / (N * N * N) * (2.0 + 2.0 * s.n() + 2.0 * sum);
}

HorizontalVector grad_weight(double alpha, const MetivierStructure& s, const GroupPoint& p) {
  require_alpha(alpha);
  const double N = require_off_identity(s, p);
  const double w = std::exp(-std::pow(N, alpha));
  return -alpha * w * std::pow(N, alpha - 1.0) * grad_norm(s, p);
}

double laplacian_weight(double alpha, const MetivierStructure& s, const GroupPoint& p) {
  require_alpha(alpha);
  const double N = require_off_identity(s, p);
  if (p.x.squaredNorm() == 0.0) return 0.0;
  const double w = std::exp(-std::pow(N, alpha));
  const double G = grad_norm_sq(s, p);
  const double LN = sub_laplacian_norm(s, p);
  return w * (-alpha * alpha * std::pow(N, 2.0 * alpha - 2.0) * G + alpha * (alpha - 1.0) * std::pow(N, alpha - 2.0) * G -
              alpha * std::pow(N, alpha - 1.0) * LN);
}

double potential_value(double alpha, const MetivierStructure& s, const GroupPoint& p) {
  require_alpha(alpha);
  const double N = require_off_identity(s, p);
  if (p.x.squaredNorm() == 0.0) return 0.0;
  const double G = grad_norm_sq(s, p);
  const double LN = sub_laplacian_norm(s, p);
  return 0.25 * alpha * alpha * std::pow(N, 2.0 * alpha - 2.0) * G -
         0.5 * alpha * (alpha - 1.0) * std::pow(N, alpha - 2.0) * G + 0.5 * alpha * std::pow(N, alpha - 1.0) * LN;
}

double potential_htype_closed_form(double alpha, const MetivierStructure& s, const GroupPoint& p) {
  require_alpha(alpha);
  const double N = require_off_identity(s, p);
  const double x2 = p.x.squaredNorm();
  if (x2 == 0.0) return 0.0;
  const int Q = homogeneous_dimension(s);
  return 0.25 * alpha * alpha * std::pow(N, 2.0 * alpha - 4.0) * x2 -
         0.5 * alpha * (Q + alpha - 2.0) * std::pow(N, alpha - 4.0) * x2;
}

PotentialConstants potential_bounds(double alpha, const ConditionEstimate& est, const MetivierStructure& s) {
  require_alpha(alpha);
  PotentialConstants k;
  k.alpha = alpha;
  k.Q = homogeneous_dimension(s);
  if (s.h_type()) {
    k.c0 = 1.0;
    k.C0 = 1.0;
  } else {
    if (!(est.c0 > 0.0)) throw std::domain_error("c0 = 0: structure is not Metivier");
    k.c0 = est.c0;
    k.C0 = est.C0;
  }
  k.c = std::min(k.c0, 1.0);
  k.C = std::max(k.C0, 1.0);
  const double n = s.n();
  const double m = s.m();
  k.c_a1 = k.c * alpha * alpha / 4.0;
  k.c_a2 = k.C * alpha * alpha / 2.0 - alpha / 2.0 * (4.0 * k.c - 2.0 * n - 2.0 - 2.0 * m * k.C0);
  k.c_a3 = k.C * alpha * alpha / 4.0;
  k.c_a4 = k.c * alpha * alpha / 2.0 - alpha / 2.0 * (4.0 * k.C - 2.0 * n - 2.0 - 2.0 * m * k.c0);
  return k;
}

SandwichBounds sandwich_bounds(const PotentialConstants& k, const MetivierStructure& s, const GroupPoint& p) {
  const double N = require_off_identity(s, p);
  const double x2 = p.x.squaredNorm();
  if (x2 == 0.0) return {0.0, 0.0};
  const double scale = std::pow(N, 2.0 * k.alpha - 4.0) * x2;
  const double Na = std::pow(N, k.alpha);
  return {scale * (k.c_a1 - k.c_a2 / Na), scale * (k.c_a3 - k.c_a4 / Na)};
}

SandwichReport check_sandwich(const PotentialConstants& k, const MetivierStructure& s,
                              std::span<const GroupPoint> points, double tol) {
  SandwichReport report;
  report.min_lower_margin = std::numeric_limits<double>::infinity();
  report.min_upper_margin = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < points.size(); ++i) {
    const double V = potential_value(k.alpha, s, points[i]);
    const auto b = sandwich_bounds(k, s, points[i]);
    const double lower_margin = V - b.lower;
    const double upper_margin = b.upper - V;
    report.min_lower_margin = std::min(report.min_lower_margin, lower_margin);
    report.min_upper_margin = std::min(report.min_upper_margin, upper_margin);
    report.max_lower_margin = std::max(report.max_lower_margin, lower_margin);
    report.max_upper_margin = std::max(report.max_upper_margin, upper_margin);
    const double slack = tol * (1.0 + std::abs(V));
    if (lower_margin < -slack || upper_margin < -slack) report.violations.push_back({i, lower_margin, upper_margin});
  }
  report.checked = points.size();
  return report;
}

double analytic_floor(const PotentialConstants& k) {
  const double a = k.alpha;
  if (a < 2.0) return -std::numeric_limits<double>::infinity();
  if (a == 2.0) return std::min(0.0, -k.c_a2);
  // f(N) = c_a1 N^{2a-2} - c_a2 N^{a-2} has a single interior minimum.
  const double Na = (a - 2.0) * k.c_a2 / ((2.0 * a - 2.0) * k.c_a1);
  const double N = std::pow(Na, 1.0 / a);
  return std::min(0.0, k.c_a1 * std::pow(N, 2.0 * a - 2.0) - k.c_a2 * std::pow(N, a - 2.0));
}

std::vector<GroupPoint> graded_cloud(const MetivierStructure& s, double r_min, double r_max, int radii,
                                     int directions, std::uint64_t seed) {
  if (!(r_min > 0.0) || !(r_max >= r_min) || radii < 1) throw std::invalid_argument("graded_cloud: bad radii");
  std::vector<GroupPoint> unit;
  for (int i = 0; i < s.horizontal_dim(); ++i)
    unit.push_back({HorizontalVector::Unit(s.horizontal_dim(), i), CentralVector::Zero(s.m())});
  for (int k = 0; k < s.m(); ++k)
    unit.push_back({HorizontalVector::Zero(s.horizontal_dim()), 0.25 * CentralVector::Unit(s.m(), k)});
  Rng rng = make_stream(seed, 7);
  for (int d = 0; d < directions; ++d) {
    // Kaplan unit sphere: |x|^4 = cos(theta), 16|t|^2 = sin(theta).
    const double theta = uniform(rng, 0.0, 0.5 * M_PI);
    auto x = unit_vector<HorizontalVector>(rng, s.horizontal_dim());
    auto t = unit_vector<CentralVector>(rng, s.m());
    unit.push_back({x * std::pow(std::cos(theta), 0.25), t * (0.25 * std::sqrt(std::sin(theta)))});
  }
  std::vector<GroupPoint> cloud;
  cloud.reserve(unit.size() * static_cast<std::size_t>(radii));
  for (int i = 0; i < radii; ++i) {
    const double r = radii == 1 ? r_min : r_min * std::pow(r_max / r_min, double(i) / (radii - 1));
    for (const auto& u : unit) cloud.push_back(dilate(s, r, u));
  }
  return cloud;
}

InfEstimate essential_inf_estimate(double alpha, const MetivierStructure& s, std::span<const GroupPoint> cloud,
                                   const ConditionEstimate& est, double sentinel) {
  require_alpha(alpha);
  InfEstimate out;
  out.sentinel = sentinel;
  out.sampled_min = std::numeric_limits<double>::infinity();
  for (const auto& p : cloud) {
    if (kaplan_norm(s, p) == 0.0) continue;
    out.sampled_min = std::min(out.sampled_min, potential_value(alpha, s, p));
  }
  out.analytic_floor = analytic_floor(potential_bounds(alpha, est, s));
  out.unbounded_below = std::isinf(out.analytic_floor) || out.sampled_min < sentinel;
  return out;
}

AdmissibilityReport admissibility_report(double alpha, const MetivierStructure& s, int directions,
                                         std::uint64_t seed) {
  require_alpha(alpha);
  constexpr double kTol = 0.05;
  const auto unit = graded_cloud(s, 1.0, 1.0, 1, directions, seed);
  auto probe = [&](double r) {
    ShellProbe shell;
    shell.radius = r;
    for (const auto& u : unit) {
      const GroupPoint p = dilate(s, r, u);
      const double N = kaplan_norm(s, p);
      const double g = std::sqrt(grad_norm_sq(s, p));
      // |grad w| / w computed without forming w, which underflows on outer shells.
      const double log_ratio = alpha * std::pow(N, alpha - 1.0) * g;
      shell.ratio_sup = std::max(shell.ratio_sup, log_ratio / (1.0 + N));
      shell.grad_sup = std::max(shell.grad_sup, std::exp(-std::pow(N, alpha)) * log_ratio);
      shell.laplacian_sup = std::max(shell.laplacian_sup, std::abs(laplacian_weight(alpha, s, p)));
    }
    return shell;
  };
  AdmissibilityReport rep;
  rep.alpha = alpha;
  for (int e = 0; e <= 6; ++e) rep.inner.push_back(probe(std::pow(10.0, -e)));
  for (int e = 0; e <= 4; ++e) rep.outer.push_back(probe(std::pow(10.0, e)));

  auto exponent = [](const ShellProbe& a, const ShellProbe& b, double ShellProbe::*field) {
    const double fa = a.*field, fb = b.*field;
    if (fa <= 0.0 || fb <= 0.0) return 0.0;
    return std::log(fb / fa) / std::log(b.radius / a.radius);
  };
  const auto& i0 = rep.inner[rep.inner.size() - 2];
  const auto& i1 = rep.inner.back();
  const auto& o0 = rep.outer[rep.outer.size() - 2];
  const auto& o1 = rep.outer.back();
  rep.grad_exponent_local = exponent(i0, i1, &ShellProbe::grad_sup);
  rep.laplacian_exponent_local = exponent(i0, i1, &ShellProbe::laplacian_sup);
  rep.ratio_exponent_local = exponent(i0, i1, &ShellProbe::ratio_sup);
  rep.ratio_exponent_global = exponent(o0, o1, &ShellProbe::ratio_sup);

  rep.grad_locally_bounded = rep.grad_exponent_local >= -kTol;
  // |f| ~ N^e is in L^Q near the identity iff e Q + Q > 0.
  rep.laplacian_locally_lq = rep.laplacian_exponent_local > -1.0 + kTol;
  rep.ratio_bounded = rep.ratio_exponent_local >= -kTol && rep.ratio_exponent_global <= kTol;
  rep.condition_a = rep.grad_locally_bounded && rep.laplacian_locally_lq;
  rep.condition_b = rep.grad_locally_bounded && rep.ratio_bounded;
  return rep;
}

}  // namespace srl
