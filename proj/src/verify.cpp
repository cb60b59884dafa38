#include "srl/verify.hpp"

#include <algorithm>
#include <cmath>

#include "srl/forms.hpp"
#include "srl/norms.hpp"
#include "srl/potential.hpp"
#include "srl/sampling.hpp"

namespace srl {

namespace {

double point_error(const GroupPoint& a, const GroupPoint& b) {
  const double diff = std::max((a.x - b.x).cwiseAbs().maxCoeff(), (a.t - b.t).cwiseAbs().maxCoeff());
  const double scale = std::max({1.0, a.x.cwiseAbs().maxCoeff(), a.t.cwiseAbs().maxCoeff()});
  return diff / scale;
}

double scalar_error(double a, double b) { return std::abs(a - b) / std::max(1.0, std::abs(a)); }

template <class F>
CheckResult relative_check(const std::string& name, std::int64_t points, double tol, F&& error) {
  CheckResult r{name, true, 0.0, tol, points};
  for (std::int64_t i = 0; i < points; ++i) r.worst = std::max(r.worst, error(static_cast<std::uint64_t>(i)));
  r.passed = r.worst <= tol;
  return r;
}

}  // namespace

GroupPoint random_point(const MetivierStructure& s, std::uint64_t seed, std::uint64_t index, double scale) {
  Rng rng = make_stream(seed, index);
  return box_point(rng, s.identity(), scale, scale);
}

std::vector<CheckResult> run_invariant_suite(const MetivierStructure& s, std::int64_t points, std::uint64_t seed) {
  constexpr double kTol = 1e-12;
  std::vector<CheckResult> out;
  auto pt = [&](std::uint64_t i, std::uint64_t slot) { return random_point(s, seed + slot, i); };

  out.push_back(relative_check("group.associativity", points, kTol, [&](std::uint64_t i) {
    const GroupPoint p = pt(i, 0), q = pt(i, 1), r = pt(i, 2);
    return point_error(multiply(s, multiply(s, p, q), r), multiply(s, p, multiply(s, q, r)));
  }));
  out.push_back(relative_check("group.inverse", points, kTol, [&](std::uint64_t i) {
    const GroupPoint p = pt(i, 0);
    return point_error(multiply(s, p, inverse(s, p)), s.identity());
  }));
  out.push_back(relative_check("dilation.automorphism", points, kTol, [&](std::uint64_t i) {
    const GroupPoint p = pt(i, 0), q = pt(i, 1);
    Rng rng = make_stream(seed + 3, i);
    const double r = std::exp(uniform(rng, -2.0, 2.0));
    return point_error(dilate(s, r, multiply(s, p, q)), multiply(s, dilate(s, r, p), dilate(s, r, q)));
  }));
  out.push_back(relative_check("norm.homogeneity", points, kTol, [&](std::uint64_t i) {
    const GroupPoint p = pt(i, 0);
    Rng rng = make_stream(seed + 3, i);
    const double r = std::exp(uniform(rng, -2.0, 2.0));
    return scalar_error(kaplan_norm(s, dilate(s, r, p)), r * kaplan_norm(s, p));
  }));
  out.push_back(relative_check("norm.inverse_symmetry", points, kTol, [&](std::uint64_t i) {
    const GroupPoint p = pt(i, 0);
    return scalar_error(kaplan_norm(s, inverse(s, p)), kaplan_norm(s, p));
  }));

  // Left invariance of X_j and L on a translated bump, evaluated inside its support.
  const SmoothBump psi(s, 2.0, 2.0);
  out.push_back(relative_check("calculus.left_invariance", points, kTol, [&](std::uint64_t i) {
    const GroupPoint g = pt(i, 0);
    Rng rng = make_stream(seed + 4, i);
    const GroupPoint q = box_point(rng, s.identity(), 1.2, 1.2);
    const GroupPoint p = multiply(s, g, q);
    const SmoothBump moved = psi.translated(g);
    double err = scalar_error(apply_sub_laplacian(s, moved, p), apply_sub_laplacian(s, psi, q));
    for (int j = 0; j < s.horizontal_dim(); ++j)
      err = std::max(err, scalar_error(apply_xj(s, moved, j, p), apply_xj(s, psi, j, q)));
    return err;
  }));

  const ConditionEstimate est = verify_metivier(s, std::max<std::int64_t>(points, 1000), seed);
  {
    CheckResult r{"metivier.condition", est.c0 > 0.0, est.c0, 0.0, est.sample_count};
    out.push_back(r);
  }
  if (s.h_type()) {
    for (double alpha : {1.0, 2.0, 3.0, 4.0}) {
      out.push_back(relative_check("potential.htype_closed_form.alpha" + std::to_string(static_cast<int>(alpha)),
                                   points, kTol, [&](std::uint64_t i) {
                                     const GroupPoint p = pt(i, 5);
                                     return scalar_error(potential_value(alpha, s, p),
                                                         potential_htype_closed_form(alpha, s, p));
                                   }));
    }
  }
  if (est.c0 > 0.0) {
    const ConditionEstimate exact = condition_from_singular_values(s, 4096, seed);
    for (double alpha : {2.0, 3.0}) {
      const PotentialConstants k = potential_bounds(alpha, exact, s);
      std::vector<GroupPoint> cloud;
      for (std::int64_t i = 0; i < points; ++i) cloud.push_back(pt(static_cast<std::uint64_t>(i), 6));
      const SandwichReport rep = check_sandwich(k, s, cloud, 1e-10);
      out.push_back({"potential.sandwich.alpha" + std::to_string(static_cast<int>(alpha)), rep.violations.empty(),
                     static_cast<double>(rep.violations.size()), 0.0, static_cast<std::int64_t>(rep.checked)});
    }
  }
  return out;
}

}  // namespace srl
