#pragma once

// Finite-difference discretization of L + V_alpha on a Dirichlet box and a
// block Lanczos eigensolver for its lowest eigenvalues.
//
// Each horizontal field is discretized on cell faces,
//   (D_j u)(face) = (u_+ - u_-)/h_x + sum_k a_jk(face) (delta_{t_k} u_- + delta_{t_k} u_+)/2,
// with a_jk = 1/2 (J_k x)_j and delta_t the central t-difference, and
// H = sum_j D_j^T D_j + diag(V). Exterior values are zero.

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "srl/htype.hpp"

namespace srl {

/// Box [-lx, lx]^{2n} x [-lt, lt]^m with nx (resp. nt) midpoint nodes per axis.
struct BoxGrid {
  double lx = 3.0;
  double lt = 8.0;
  int nx = 24;
  int nt = 48;

  double hx() const { return 2.0 * lx / nx; }
  double ht() const { return 2.0 * lt / nt; }
  double x_node(int i) const { return -lx + (i + 0.5) * hx(); }
  double t_node(int i) const { return -lt + (i + 0.5) * ht(); }
  /// Throws std::invalid_argument for counts < 3, non-positive widths, or when
  /// both counts are odd (the identity would be a node).
  void validate() const;
  std::size_t node_count(const MetivierStructure& s) const;
  std::string describe() const;
};

/// Compressed-row sparse matrix.
struct CsrMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<std::size_t> row_offsets{0};
  std::vector<std::size_t> col_indices;
  std::vector<double> values;

  std::size_t nonzeros() const { return values.size(); }
  void apply(const double* in, double* out) const;
  Eigen::VectorXd apply(const Eigen::VectorXd& in) const;
  Eigen::MatrixXd to_dense() const;
  double entry(std::size_t r, std::size_t c) const;
};

/// Square CSR matrix that is expected to be exactly symmetric.
struct SparseSymmetricOperator : CsrMatrix {
  std::size_t dimension() const { return rows; }
  /// max |A_ij - A_ji| over stored entries (and their mirrors).
  double asymmetry() const;
  bool is_symmetric() const { return asymmetry() == 0.0; }
};

/// Factor D_j together with the face each row lives on.
struct DerivativeFactor {
  CsrMatrix matrix;
  std::vector<GroupPoint> faces;  // coordinates of the face centre of each row
  std::vector<bool> interior;     // stencil entirely inside the box
};

/// Active-node numbering: axis 0 fastest, x axes first then t axes.
GroupPoint grid_node(const MetivierStructure& s, const BoxGrid& grid, std::size_t index);

struct OperatorOptions {
  bool include_potential = true;
  /// Nodes with N > clamp_radius are removed (V = +infinity there).
  double clamp_radius = std::numeric_limits<double>::infinity();
};

/// Rows for every face whose stencil touches an active node, so H restricted
/// to the active nodes is a principal submatrix of the unbounded-lattice operator.
DerivativeFactor assemble_derivative(const MetivierStructure& s, const BoxGrid& grid, int j,
                                     const OperatorOptions& options = {});

struct AssembledOperator {
  SparseSymmetricOperator matrix;
  std::vector<std::size_t> active;  // grid node index of each row
  std::vector<double> potential;    // V at each active node (0 without potential)
};

AssembledOperator assemble_operator(double alpha, const MetivierStructure& s, const BoxGrid& grid,
                                    const OperatorOptions& options = {});

struct SpectrumResult {
  std::vector<double> eigenvalues;  // ascending
  std::vector<double> residuals;    // ||H v - lambda v||_2, unit v
  std::int64_t iterations = 0;      // matrix-vector products
  bool converged = false;
  std::string grid;  // provenance, filled by callers that know the grid
};

struct LanczosOptions {
  int block_size = 2;
  int max_basis = 0;  // 0: chosen from k
};

/// Lowest k eigenpairs by thick-restart block Lanczos with full
/// reorthogonalization. Throws std::invalid_argument on asymmetric input or
/// k >= dimension; non-convergence within max_iter matrix-vector products is
/// reported through `converged` with the best residuals.
SpectrumResult lanczos_lowest(const SparseSymmetricOperator& H, int k, double tol, std::int64_t max_iter,
                              std::uint64_t seed, const LanczosOptions& options = {});

struct EigenCount {
  int count = 0;
  bool lower_bound = false;  // budget exhausted before passing Lambda
  int k_used = 0;
  double largest = 0.0;      // largest Ritz value computed
};

/// Count of eigenvalues below Lambda, doubling k from `initial_k` up to `budget`.
EigenCount eigen_count_below(const SparseSymmetricOperator& H, double Lambda, int budget, double tol = 1e-8,
                             std::uint64_t seed = 0, int initial_k = 8);

struct BoxStudyRow {
  BoxGrid grid;
  std::size_t dimension = 0;
  SpectrumResult spectrum;
  std::vector<double> relative_change;  // against the previous box; empty for the first
  EigenCount count;                     // only when a count level was requested
};

struct BoxStudy {
  double alpha = 0.0;
  int k = 0;
  double count_level = std::numeric_limits<double>::quiet_NaN();
  std::vector<BoxStudyRow> rows;
};

/// Lowest-k eigenvalues on each box, with successive relative changes, and
/// optionally the eigenvalue count below count_level. Boxes must be nested.
BoxStudy box_convergence_study(double alpha, const MetivierStructure& s, const std::vector<BoxGrid>& boxes, int k,
                               double count_level = std::numeric_limits<double>::quiet_NaN(), double tol = 1e-8,
                               std::uint64_t seed = 0, int count_budget = 256);

}  // namespace srl
