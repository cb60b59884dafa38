#include "srl/forms.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "srl/norms.hpp"
#include "srl/potential.hpp"
#include "srl/sampling.hpp"

namespace srl {

namespace {

bool is_identity(const GroupPoint& p) { return p.x.squaredNorm() == 0.0 && p.t.squaredNorm() == 0.0; }

// a_{jk}(x) = 1/2 (J_k x)_j, the t_k-coefficient of X_j.
Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, kMaxHorizontal, kMaxCentral> central_coefficients(
    const MetivierStructure& s, const HorizontalVector& x) {
  Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, kMaxHorizontal, kMaxCentral> a(s.horizontal_dim(), s.m());
  for (int k = 0; k < s.m(); ++k) a.col(k) = 0.5 * (s.map(k) * x);
  return a;
}

void require_covered(const QuadratureGrid& grid, const TestFunction& f) {
  if (!grid.covers(f.support())) throw std::invalid_argument("quadrature grid does not cover the support");
}

}  // namespace

double BumpProfile::value(double s) { return s < 1.0 ? std::exp(-1.0 / (1.0 - s)) : 0.0; }

double BumpProfile::d1(double s) {
  if (s >= 1.0) return 0.0;
  const double u = 1.0 / (1.0 - s);
  return -value(s) * u * u;
}

double BumpProfile::d2(double s) {
  if (s >= 1.0) return 0.0;
  const double u = 1.0 / (1.0 - s);
  return value(s) * (u * u * u * u - 2.0 * u * u * u);
}

SmoothBump::SmoothBump(const MetivierStructure& s, double x_radius, double t_radius)
    : structure_(s), x_radius_(x_radius), t_radius_(t_radius), center_(s.identity()) {
  if (!(x_radius > 0.0) || !(t_radius > 0.0)) throw std::invalid_argument("bump radii must be positive");
  pullback_ = PointMatrix::Identity(s.dim(), s.dim());
}

GroupPoint SmoothBump::to_local(const GroupPoint& p) const {
  return multiply(structure_, inverse(structure_, center_), p);
}

Jet SmoothBump::local_jet(const GroupPoint& q) const {
  const int d = structure_.dim();
  const int h = structure_.horizontal_dim();
  const int m = structure_.m();
  Jet jet;
  jet.grad = PointVector::Zero(d);
  jet.hessian = PointMatrix::Zero(d, d);
  const double a2 = x_radius_ * x_radius_;
  const double b2 = t_radius_ * t_radius_;
  const double u = q.x.squaredNorm() / a2;
  const double v = q.t.squaredNorm() / b2;
  if (u >= 1.0 || v >= 1.0) return jet;

  const double gu = BumpProfile::value(u), gv = BumpProfile::value(v);
  const double du = BumpProfile::d1(u), dv = BumpProfile::d1(v);
  const double ddu = BumpProfile::d2(u), ddv = BumpProfile::d2(v);
  const HorizontalVector ux = (2.0 / a2) * q.x;  // grad u
  const CentralVector vt = (2.0 / b2) * q.t;     // grad v

  jet.value = gu * gv;
  jet.grad.head(h) = du * gv * ux;
  jet.grad.tail(m) = gu * dv * vt;
  jet.hessian.topLeftCorner(h, h) = gv * (ddu * ux * ux.transpose());
  jet.hessian.topLeftCorner(h, h).diagonal().array() += gv * du * 2.0 / a2;
  jet.hessian.bottomRightCorner(m, m) = gu * (ddv * vt * vt.transpose());
  jet.hessian.bottomRightCorner(m, m).diagonal().array() += gu * dv * 2.0 / b2;
  jet.hessian.topRightCorner(h, m) = du * dv * ux * vt.transpose();
  jet.hessian.bottomLeftCorner(m, h) = jet.hessian.topRightCorner(h, m).transpose();
  return jet;
}

Jet SmoothBump::jet(const GroupPoint& p) const {
  Jet local = local_jet(to_local(p));
  if (local.value == 0.0) return local;
  // q = center^{-1} p is affine in p with Jacobian pullback_.
  Jet out;
  out.value = local.value;
  out.grad = pullback_.transpose() * local.grad;
  out.hessian = pullback_.transpose() * local.hessian * pullback_;
  return out;
}

double SmoothBump::value(const GroupPoint& p) const {
  const GroupPoint q = to_local(p);
  return BumpProfile::value(q.x.squaredNorm() / (x_radius_ * x_radius_)) *
         BumpProfile::value(q.t.squaredNorm() / (t_radius_ * t_radius_));
}

SupportBox SmoothBump::support() const {
  const int h = structure_.horizontal_dim();
  const int m = structure_.m();
  SupportBox box{PointVector(structure_.dim()), PointVector(structure_.dim())};
  for (int i = 0; i < h; ++i) {
    box.lo(i) = center_.x(i) - x_radius_;
    box.hi(i) = center_.x(i) + x_radius_;
  }
  // t_k = t_{g,k} + tau_k + 1/2 (J_k x_g, y) with |y| <= a, |tau| <= b.
  for (int k = 0; k < m; ++k) {
    const double shear = 0.5 * (structure_.map(k) * center_.x).norm() * x_radius_;
    box.lo(h + k) = center_.t(k) - t_radius_ - shear;
    box.hi(h + k) = center_.t(k) + t_radius_ + shear;
  }
  return box;
}

SmoothBump SmoothBump::translated(const GroupPoint& g) const {
  structure_.check_point(g);
  SmoothBump out = *this;
  out.center_ = multiply(structure_, g, center_);
  // q_t = p_t - c_t - 1/2 (J_k c_x, p_x): d q_t / d p_x = -1/2 (J_k c_x)^T.
  const int h = structure_.horizontal_dim();
  out.pullback_ = PointMatrix::Identity(structure_.dim(), structure_.dim());
  for (int k = 0; k < structure_.m(); ++k)
    out.pullback_.block(h + k, 0, 1, h) = -0.5 * (structure_.map(k) * out.center_.x).transpose();
  return out;
}

HorizontalVector horizontal_gradient(const MetivierStructure& s, const GroupPoint& p, const Jet& jet) {
  const int h = s.horizontal_dim();
  const auto a = central_coefficients(s, p.x);
  HorizontalVector g = jet.grad.head(h);
  g += a * jet.grad.tail(s.m());
  return g;
}

double sub_laplacian(const MetivierStructure& s, const GroupPoint& p, const Jet& jet) {
  const int h = s.horizontal_dim();
  const int m = s.m();
  const auto a = central_coefficients(s, p.x);
  const auto Hxx = jet.hessian.topLeftCorner(h, h);
  const auto Hxt = jet.hessian.topRightCorner(h, m);
  const auto Htt = jet.hessian.bottomRightCorner(m, m);
  // X_j a_{jk} = 1/2 (J_k)_{jj} = 0, so X_j^2 has no first-order part.
  double sum = Hxx.trace();
  for (int j = 0; j < h; ++j) {
    const CentralVector aj = a.row(j).transpose();
    sum += 2.0 * Hxt.row(j).dot(aj) + aj.dot(Htt * aj);
  }
  return -sum;
}

double apply_xj(const MetivierStructure& s, const TestFunction& f, int j, const GroupPoint& p) {
  if (j < 0 || j >= s.horizontal_dim()) throw std::out_of_range("apply_xj: index out of range");
  s.check_point(p);
  return horizontal_gradient(s, p, f.jet(p))(j);
}

double apply_sub_laplacian(const MetivierStructure& s, const TestFunction& f, const GroupPoint& p) {
  s.check_point(p);
  return sub_laplacian(s, p, f.jet(p));
}

QuadratureGrid::QuadratureGrid(PointVector lo, PointVector hi, std::vector<int> counts)
    : lo_(std::move(lo)), hi_(std::move(hi)), counts_(std::move(counts)) {
  if (lo_.size() != hi_.size() || static_cast<std::size_t>(lo_.size()) != counts_.size())
    throw std::invalid_argument("quadrature grid: dimension mismatch");
  size_ = 1;
  cell_volume_ = 1.0;
  for (int a = 0; a < lo_.size(); ++a) {
    if (counts_[static_cast<std::size_t>(a)] < 1 || !(hi_(a) > lo_(a)))
      throw std::invalid_argument("quadrature grid: empty axis");
    size_ *= static_cast<std::size_t>(counts_[static_cast<std::size_t>(a)]);
    cell_volume_ *= spacing(a);
  }
}

QuadratureGrid QuadratureGrid::covering(const SupportBox& box, int per_axis) {
  return QuadratureGrid(box.lo, box.hi, std::vector<int>(static_cast<std::size_t>(box.lo.size()), per_axis));
}

GroupPoint QuadratureGrid::node(const MetivierStructure& s, std::size_t index) const {
  const int h = s.horizontal_dim();
  GroupPoint p{HorizontalVector(h), CentralVector(s.m())};
  for (int a = 0; a < dim(); ++a) {
    const auto count = static_cast<std::size_t>(counts_[static_cast<std::size_t>(a)]);
    const double c = lo_(a) + (static_cast<double>(index % count) + 0.5) * spacing(a);
    index /= count;
    if (a < h)
      p.x(a) = c;
    else
      p.t(a - h) = c;
  }
  return p;
}

bool QuadratureGrid::covers(const SupportBox& box) const {
  if (box.lo.size() != lo_.size()) return false;
  for (int a = 0; a < dim(); ++a) {
    const double slack = 1e-12 * (1.0 + std::abs(lo_(a)) + std::abs(hi_(a)));
    if (box.lo(a) < lo_(a) - slack || box.hi(a) > hi_(a) + slack) return false;
  }
  return true;
}

double dirichlet_form(double alpha, const MetivierStructure& s, const TestFunction& f, const QuadratureGrid& grid) {
  require_covered(grid, f);
  return grid.integrate(s, [&](const GroupPoint& p) {
    const Jet jet = f.jet(p);
    if (jet.value == 0.0 && jet.grad.isZero(0.0)) return 0.0;
    return horizontal_gradient(s, p, jet).squaredNorm() * weight(alpha, s, p);
  });
}

ConjugationResult conjugation_residual(double alpha, const MetivierStructure& s, const TestFunction& f,
                                       const QuadratureGrid& grid) {
  if (!(alpha >= 2.0)) throw std::invalid_argument("conjugation_residual requires alpha >= 2");
  require_covered(grid, f);
  ConjugationResult r;
  r.lhs = dirichlet_form(alpha, s, f, grid);
  r.rhs = grid.integrate(s, [&](const GroupPoint& p) {
    const Jet jet = f.jet(p);
    if (jet.value == 0.0 && jet.grad.isZero(0.0)) return 0.0;
    const double N = kaplan_norm(s, p);
    const double root_w = std::exp(-0.5 * std::pow(N, alpha));
    const double phi = jet.value * root_w;
    // grad_H(f sqrt w) = sqrt w (grad_H f - alpha/2 f N^{alpha-1} grad_H N)
    HorizontalVector grad_phi = horizontal_gradient(s, p, jet);
    double V = 0.0;
    if (!is_identity(p)) {
      grad_phi -= (0.5 * alpha * jet.value * std::pow(N, alpha - 1.0)) * grad_norm(s, p);
      V = potential_value(alpha, s, p);
    }
    grad_phi *= root_w;
    return grad_phi.squaredNorm() + V * phi * phi;
  });
  r.residual = std::abs(r.lhs - r.rhs);
  return r;
}

SmoothBump weyl_sequence(const MetivierStructure& s, const SmoothBump& psi, int n) {
  if (n < 0) throw std::invalid_argument("weyl_sequence: n must be nonnegative");
  GroupPoint g = s.identity();
  g.t(0) = static_cast<double>(n);
  return psi.translated(g);
}

FunctionNorms function_norms(const MetivierStructure& s, const TestFunction& f, const QuadratureGrid& grid) {
  require_covered(grid, f);
  FunctionNorms out;
  out.l2 = std::sqrt(grid.integrate(s, [&](const GroupPoint& p) {
    const double v = f.value(p);
    return v * v;
  }));
  out.sub_laplacian = std::sqrt(grid.integrate(s, [&](const GroupPoint& p) {
    const Jet jet = f.jet(p);
    if (jet.value == 0.0) return 0.0;
    const double l = sub_laplacian(s, p, jet);
    return l * l;
  }));
  return out;
}

WeylRecord weyl_residual(double alpha, const MetivierStructure& s, const SmoothBump& psi, int n, double lambda,
                         const QuadratureGrid& grid) {
  if (n < 2) throw std::invalid_argument("weyl_residual: n must be at least 2");
  const SmoothBump psi_n = weyl_sequence(s, psi, n);
  require_covered(grid, psi_n);

  WeylRecord rec;
  rec.n_index = n;
  const double res2 = grid.integrate(s, [&](const GroupPoint& p) {
    const Jet jet = psi_n.jet(p);
    if (jet.value == 0.0) return 0.0;
    const double V = is_identity(p) ? 0.0 : potential_value(alpha, s, p);
    const double r = (lambda + V) * jet.value + sub_laplacian(s, p, jet);
    return r * r;
  });
  rec.residual = std::sqrt(res2);
  rec.psi_norm = std::sqrt(grid.integrate(s, [&](const GroupPoint& p) {
    const double v = psi_n.value(p);
    return v * v;
  }));

  // First index whose support is disjoint from that of psi_n.
  rec.overlap_index = n + static_cast<int>(std::ceil(2.0 * psi.t_radius()));
  const SmoothBump psi_m = weyl_sequence(s, psi, rec.overlap_index);
  const SupportBox bn = psi_n.support(), bm = psi_m.support();
  PointVector lo = bn.lo.cwiseMin(bm.lo).cwiseMin(grid.lo());
  PointVector hi = bn.hi.cwiseMax(bm.hi).cwiseMax(grid.hi());
  std::vector<int> counts(static_cast<std::size_t>(grid.dim()));
  for (int a = 0; a < grid.dim(); ++a) {
    const double h = grid.spacing(a);
    counts[static_cast<std::size_t>(a)] = std::max(1, static_cast<int>(std::ceil((hi(a) - lo(a)) / h - 1e-9)));
    hi(a) = lo(a) + counts[static_cast<std::size_t>(a)] * h;
  }
  const QuadratureGrid joint(lo, hi, counts);
  rec.overlap_check = joint.integrate(s, [&](const GroupPoint& p) {
    const double d = psi_n.value(p) - psi_m.value(p);
    return d * d;
  });
  return rec;
}

CylinderPotential cylinder_potential(double alpha, const MetivierStructure& s, double t_max, std::int64_t samples,
                                     std::uint64_t seed) {
  if (samples < 1) throw std::invalid_argument("cylinder_potential needs at least one sample");
  const int h = s.horizontal_dim();
  CylinderPotential out{0.0, std::numeric_limits<double>::infinity()};
  auto visit = [&](const GroupPoint& p) {
    const double V = potential_value(alpha, s, p);
    out.sup_abs = std::max(out.sup_abs, std::abs(V));
    out.min = std::min(out.min, V);
  };
  // The boundary N = 1 with |x| = 1, t = 0 along each axis.
  for (int i = 0; i < h; ++i) {
    GroupPoint p = s.identity();
    p.x(i) = 1.0;
    visit(p);
  }
  for (std::int64_t i = 0; i < samples; ++i) {
    Rng rng = make_stream(seed, static_cast<std::uint64_t>(i));
    GroupPoint p = s.identity();
    const double rx = std::pow(uniform(rng, 0.0, 1.0), 1.0 / h);
    p.x = rx * unit_vector<HorizontalVector>(rng, h);
    const double t_min = 0.25 * std::sqrt(std::max(0.0, 1.0 - std::pow(rx, 4)));
    // Half the draws hug the inner boundary N = 1, where |V| is largest.
    double tn;
    if (i % 2 == 0)
      tn = t_min + (t_max - t_min) * std::pow(uniform(rng, 0.0, 1.0), 4);
    else
      tn = uniform(rng, t_min, std::max(t_min, t_max));
    p.t = tn * unit_vector<CentralVector>(rng, s.m());
    if (is_identity(p)) continue;
    visit(p);
  }
  return out;
}

WeylStudy weyl_study(double alpha, const MetivierStructure& s, const SmoothBump& psi, const std::vector<int>& indices,
                     double lambda, int points_per_axis, std::uint64_t seed) {
  if (indices.empty()) throw std::invalid_argument("weyl_study: no indices");
  WeylStudy out;
  out.alpha = alpha;
  out.x_radius = psi.x_radius();
  out.t_radius = psi.t_radius();
  out.points_per_axis = points_per_axis;

  const int n_max = *std::max_element(indices.begin(), indices.end());
  const CylinderPotential cyl = cylinder_potential(alpha, s, n_max + psi.t_radius() + 1.0, 20000, seed);
  out.potential_sup = cyl.sup_abs;
  if (std::isnan(lambda)) {
    double floor = cyl.min;
    if (alpha >= 2.0) {
      const ConditionEstimate est = condition_from_singular_values(s, 4096, seed);
      floor = analytic_floor(potential_bounds(alpha, est, s));
    }
    lambda = 1.0 + std::max(0.0, -floor);
  }
  out.lambda = lambda;

  const QuadratureGrid base = QuadratureGrid::covering(psi.support(), points_per_axis);
  const FunctionNorms norms = function_norms(s, psi, base);
  out.psi_norm = norms.l2;
  out.sub_laplacian_norm = norms.sub_laplacian;
  out.bound = (std::abs(lambda) + out.potential_sup) * norms.l2 + norms.sub_laplacian;

  for (int n : indices) {
    const SmoothBump psi_n = weyl_sequence(s, psi, n);
    const QuadratureGrid grid = QuadratureGrid::covering(psi_n.support(), points_per_axis);
    out.records.push_back(weyl_residual(alpha, s, psi, n, lambda, grid));
  }
  return out;
}

double log_log_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw std::invalid_argument("log_log_slope: need two or more points");
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += std::log(x[i]);
    my += std::log(y[i]);
  }
  mx /= static_cast<double>(x.size());
  my /= static_cast<double>(x.size());
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = std::log(x[i]) - mx;
    sxy += dx * (std::log(y[i]) - my);
    sxx += dx * dx;
  }
  return sxy / sxx;
}

}  // namespace srl
