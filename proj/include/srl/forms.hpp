#pragma once

// Test functions with closed-form derivatives, horizontal calculus on them,
// midpoint quadrature of the weighted Dirichlet form and of the ground-state
// (conjugated) form, and the central-translate Weyl family.

#include <cstdint>
#include <vector>

#include "srl/htype.hpp"
#include "srl/parallel.hpp"

namespace srl {

inline constexpr int kMaxDim = kMaxHorizontal + kMaxCentral;
using PointVector = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, kMaxDim, 1>;
using PointMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, kMaxDim, kMaxDim>;

/// Value, Euclidean gradient and Hessian in the (x, t) coordinates.
struct Jet {
  double value = 0.0;
  PointVector grad;
  PointMatrix hessian;
};

/// Axis-aligned box in (x, t) coordinates.
struct SupportBox {
  PointVector lo;
  PointVector hi;
};

class TestFunction {
 public:
  virtual ~TestFunction() = default;
  virtual Jet jet(const GroupPoint& p) const = 0;
  virtual double value(const GroupPoint& p) const { return jet(p).value; }
  virtual SupportBox support() const = 0;
};

/// Flat bump g(s) = exp(-1/(1-s)) for s < 1, 0 otherwise.
struct BumpProfile {
  static double value(double s);
  static double d1(double s);
  static double d2(double s);
};

/// psi(p) = g(|q_x|^2/a^2) g(|q_t|^2/b^2) with q = center^{-1} . p, i.e. the
/// left translate by `center` of the product bump at the identity.
class SmoothBump final : public TestFunction {
 public:
  SmoothBump(const MetivierStructure& s, double x_radius, double t_radius);

  Jet jet(const GroupPoint& p) const override;
  double value(const GroupPoint& p) const override;
  SupportBox support() const override;

  /// Left translate by g: the result is p -> this(g^{-1} p).
  SmoothBump translated(const GroupPoint& g) const;

  double x_radius() const { return x_radius_; }
  double t_radius() const { return t_radius_; }
  const GroupPoint& center() const { return center_; }

 private:
  Jet local_jet(const GroupPoint& q) const;
  GroupPoint to_local(const GroupPoint& p) const;

  MetivierStructure structure_;
  double x_radius_;
  double t_radius_;
  GroupPoint center_;
  PointMatrix pullback_;  // d q / d p, constant in p
};

/// X_j f = d_{x_j} f + 1/2 sum_k (J_k x)_j d_{t_k} f, j = 0..2n-1.
double apply_xj(const MetivierStructure& s, const TestFunction& f, int j, const GroupPoint& p);
HorizontalVector horizontal_gradient(const MetivierStructure& s, const GroupPoint& p, const Jet& jet);
/// L f = -sum_j X_j^2 f.
double apply_sub_laplacian(const MetivierStructure& s, const TestFunction& f, const GroupPoint& p);
double sub_laplacian(const MetivierStructure& s, const GroupPoint& p, const Jet& jet);

/// Tensor midpoint rule on a box in R^{2n+m}.
class QuadratureGrid {
 public:
  QuadratureGrid(PointVector lo, PointVector hi, std::vector<int> counts);
  /// Box of `box`, with `per_axis` nodes along every axis.
  static QuadratureGrid covering(const SupportBox& box, int per_axis);

  int dim() const { return static_cast<int>(counts_.size()); }
  std::size_t size() const { return size_; }
  double cell_volume() const { return cell_volume_; }
  double spacing(int axis) const { return (hi_(axis) - lo_(axis)) / counts_[static_cast<std::size_t>(axis)]; }
  const PointVector& lo() const { return lo_; }
  const PointVector& hi() const { return hi_; }
  const std::vector<int>& counts() const { return counts_; }

  GroupPoint node(const MetivierStructure& s, std::size_t index) const;
  bool covers(const SupportBox& box) const;

  /// Deterministic (fixed-chunk, pairwise) sum of term(node) * cell volume.
  template <class F>
  double integrate(const MetivierStructure& s, F&& term) const {
    return cell_volume_ * deterministic_sum(size_, [&](std::size_t i) { return term(node(s, i)); });
  }

 private:
  PointVector lo_;
  PointVector hi_;
  std::vector<int> counts_;
  std::size_t size_ = 0;
  double cell_volume_ = 0.0;
};

/// int |grad_H f|^2 w_alpha. Throws std::invalid_argument when the grid does
/// not cover supp f.
double dirichlet_form(double alpha, const MetivierStructure& s, const TestFunction& f, const QuadratureGrid& grid);

struct ConjugationResult {
  double lhs = 0.0;  // int |grad_H f|^2 w
  double rhs = 0.0;  // int |grad_H phi|^2 + V phi^2,  phi = f sqrt(w)
  double residual = 0.0;
};

/// Quadratic-form check of U L^w U^{-1} = L + V_alpha. Requires alpha >= 2.
ConjugationResult conjugation_residual(double alpha, const MetivierStructure& s, const TestFunction& f,
                                       const QuadratureGrid& grid);

/// psi_n(x,t) = psi((0, -n u_1)(x,t)), the left translate by (0, n u_1).
SmoothBump weyl_sequence(const MetivierStructure& s, const SmoothBump& psi, int n);

struct FunctionNorms {
  double l2 = 0.0;            // ||f||_2
  double sub_laplacian = 0.0;  // ||L f||_2
};

FunctionNorms function_norms(const MetivierStructure& s, const TestFunction& f, const QuadratureGrid& grid);

struct WeylRecord {
  int n_index = 0;
  double residual = 0.0;  // ||(lambda + L + V_alpha) psi_n||_2
  double psi_norm = 0.0;  // ||psi_n||_2
  int overlap_index = 0;  // the designated m
  double overlap_check = 0.0;  // ||psi_n - psi_m||_2^2
};

/// `grid` must cover supp psi_n; the overlap is integrated on a grid with the
/// same spacing spanning both supports, with m = n + ceil(2 t_radius).
WeylRecord weyl_residual(double alpha, const MetivierStructure& s, const SmoothBump& psi, int n, double lambda,
                         const QuadratureGrid& grid);

/// sup |V_alpha| and min V_alpha sampled over the cylinder
/// {(x,t): |x| <= 1, N(x,t) >= 1}, |t| <= t_max.
struct CylinderPotential {
  double sup_abs = 0.0;
  double min = 0.0;
};

CylinderPotential cylinder_potential(double alpha, const MetivierStructure& s, double t_max,
                                     std::int64_t samples, std::uint64_t seed);

/// Weyl quasi-mode experiment over a list of translation indices.
struct WeylStudy {
  double alpha = 0.0;
  double lambda = 0.0;
  double potential_sup = 0.0;  // C
  double psi_norm = 0.0;
  double sub_laplacian_norm = 0.0;
  double bound = 0.0;  // (|lambda| + C) ||psi|| + ||L psi||
  double x_radius = 0.0;
  double t_radius = 0.0;
  int points_per_axis = 0;
  std::vector<WeylRecord> records;
};

/// lambda = NaN selects 1 + max(0, -floor), with floor the analytic lower
/// bound of V_alpha when alpha >= 2 and the sampled minimum over the cylinder
/// otherwise.
WeylStudy weyl_study(double alpha, const MetivierStructure& s, const SmoothBump& psi, const std::vector<int>& indices,
                     double lambda, int points_per_axis, std::uint64_t seed = 0);

/// Least-squares slope of log y against log x.
double log_log_slope(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace srl
