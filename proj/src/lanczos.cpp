#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "srl/sampling.hpp"
#include "srl/spectral.hpp"

namespace srl {

namespace {

using Eigen::Index;
using Eigen::MatrixXd;

// Orthonormal basis of the columns of W, which are assumed orthogonal to
// V[:, 0:s] already; columns that vanish are replaced by random directions
// orthogonalized against V[:, 0:s] and the block.
MatrixXd orthonormalize_block(const MatrixXd& V, Index s, const MatrixXd& W, Index want, Rng& rng) {
  const Index d = V.rows();
  std::normal_distribution<double> normal(0.0, 1.0);
  MatrixXd out(d, want);
  Index filled = 0;
  auto accept = [&](Eigen::VectorXd w, double reference, bool project) {
    for (int pass = 0; pass < 2; ++pass) {
      if (project && s > 0) w -= V.leftCols(s) * (V.leftCols(s).transpose() * w);
      if (filled > 0) w -= out.leftCols(filled) * (out.leftCols(filled).transpose() * w);
    }
    const double norm = w.norm();
    if (!(norm > 1e-10 * reference)) return;
    out.col(filled++) = w / norm;
  };
  const double scale = W.cols() > 0 ? W.colwise().norm().maxCoeff() : 0.0;
  for (Index c = 0; c < W.cols() && filled < want; ++c) accept(W.col(c), std::max(scale, 1e-300), false);
  for (int attempts = 0; filled < want && attempts < 64 * want; ++attempts) {
    Eigen::VectorXd w(d);
    for (Index i = 0; i < d; ++i) w(i) = normal(rng);
    const double reference = w.norm();
    accept(std::move(w), reference, true);
  }
  return out.leftCols(filled);
}

}  // namespace

SpectrumResult lanczos_lowest(const SparseSymmetricOperator& H, int k, double tol, std::int64_t max_iter,
                              std::uint64_t seed, const LanczosOptions& options) {
  const Index d = static_cast<Index>(H.dimension());
  if (H.rows != H.cols) throw std::invalid_argument("lanczos_lowest: matrix is not square");
  if (k < 1 || k >= d) throw std::invalid_argument("lanczos_lowest: need 1 <= k < dimension");
  if (!H.is_symmetric()) throw std::invalid_argument("lanczos_lowest: matrix is not symmetric");

  const Index b = std::clamp<Index>(options.block_size, 1, d);
  Index cap = options.max_basis > 0 ? options.max_basis : std::max<Index>(2 * k + 8 * b, 48);
  cap = std::min(cap, d);
  // Only whole blocks enter the basis before a restart (a truncated block
  // breaks the Krylov structure the restart relies on).
  if (cap < d) cap = std::max(b * (cap / b), 2 * b);
  const Index keep = std::min<Index>(cap - b, b * ((k + std::max<Index>(2 * b, k / 4) + b - 1) / b));

  Rng rng = make_stream(seed, 0);
  MatrixXd V(d, cap), T = MatrixXd::Zero(cap, cap);
  MatrixXd start(d, b);
  {
    std::normal_distribution<double> normal(0.0, 1.0);
    for (Index c = 0; c < b; ++c)
      for (Index i = 0; i < d; ++i) start(i, c) = normal(rng);
  }
  MatrixXd Z = orthonormalize_block(V, 0, start, b, rng);
  MatrixXd W;  // (I - V V^T) A V_last, the continuation block
  Index s = 0;
  SpectrumResult result;

  while (true) {
    Index last = s;
    while (s < cap && Z.cols() > 0) {
      const Index nz = std::min<Index>(Z.cols(), cap - s);
      V.middleCols(s, nz) = Z.leftCols(nz);
      MatrixXd AZ(d, nz);
      for (Index c = 0; c < nz; ++c) H.apply(V.col(s + c).data(), AZ.col(c).data());
      result.iterations += nz;
      last = s;
      s += nz;
      // The first Gram-Schmidt pass yields the new columns of T = V^T A V.
      const MatrixXd C = V.leftCols(s).transpose() * AZ;
      T.block(0, last, s, nz) = C;
      T.block(last, 0, nz, last) = C.topRows(last).transpose();
      W = AZ - V.leftCols(s) * C;
      W -= V.leftCols(s) * (V.leftCols(s).transpose() * W);
      if (s == cap || result.iterations >= max_iter) break;
      Z = orthonormalize_block(V, s, W, b, rng);
    }

    const MatrixXd Ts = 0.5 * (T.topLeftCorner(s, s) + T.topLeftCorner(s, s).transpose());
    Eigen::SelfAdjointEigenSolver<MatrixXd> eig(Ts);
    const Index report = std::min<Index>(k, s);

    // A V = V T + W E_last^T, so the Ritz residuals follow from W.
    bool estimate_ok = report == k;
    if (s < d) {
      const MatrixXd est = W * eig.eigenvectors().block(last, 0, s - last, report);
      for (Index i = 0; i < report; ++i) estimate_ok = estimate_ok && est.col(i).norm() <= 0.5 * tol;
    }
    const bool stop = result.iterations >= max_iter || s == d;
    if (estimate_ok || stop) {
      const MatrixXd U = V.leftCols(s) * eig.eigenvectors().leftCols(report);
      MatrixXd AU(d, report);
      for (Index c = 0; c < report; ++c) H.apply(U.col(c).data(), AU.col(c).data());
      result.iterations += report;
      const MatrixXd R = AU - U * eig.eigenvalues().head(report).asDiagonal();
      result.eigenvalues.assign(eig.eigenvalues().data(), eig.eigenvalues().data() + report);
      result.residuals.resize(static_cast<std::size_t>(report));
      bool ok = report == k;
      for (Index i = 0; i < report; ++i) {
        result.residuals[static_cast<std::size_t>(i)] = R.col(i).norm();
        ok = ok && R.col(i).norm() <= tol;
      }
      result.converged = ok;
      if (ok || stop) return result;
    }

    // Thick restart: keep the lowest Ritz vectors and continue from W.
    V.leftCols(keep) = (V.leftCols(s) * eig.eigenvectors().leftCols(keep)).eval();
    T.setZero();
    T.topLeftCorner(keep, keep).diagonal() = eig.eigenvalues().head(keep);
    s = keep;
    Z = orthonormalize_block(V, s, W, b, rng);
  }
}

EigenCount eigen_count_below(const SparseSymmetricOperator& H, double Lambda, int budget, double tol,
                             std::uint64_t seed, int initial_k) {
  const int d = static_cast<int>(H.dimension());
  if (budget < 1 || initial_k < 1) throw std::invalid_argument("eigen_count_below: budget and initial k must be positive");
  EigenCount out;
  int k = std::min({std::max(initial_k, 1), budget, d - 1});
  while (true) {
    std::vector<double> values;
    if (k < 1) {
      Eigen::SelfAdjointEigenSolver<MatrixXd> eig(H.to_dense());
      values.assign(eig.eigenvalues().data(), eig.eigenvalues().data() + d);
    } else {
      const SpectrumResult r = lanczos_lowest(H, k, tol, 200000, seed);
      values = r.eigenvalues;
    }
    out.k_used = static_cast<int>(values.size());
    out.largest = values.empty() ? 0.0 : values.back();
    out.count = static_cast<int>(std::count_if(values.begin(), values.end(), [&](double v) { return v < Lambda; }));
    if (out.largest >= Lambda || out.k_used >= d) return out;
    if (k >= budget) {
      out.lower_bound = true;
      return out;
    }
    k = std::min({2 * k, budget, d - 1});
  }
}

BoxStudy box_convergence_study(double alpha, const MetivierStructure& s, const std::vector<BoxGrid>& boxes, int k,
                               double count_level, double tol, std::uint64_t seed, int count_budget) {
  BoxStudy study;
  study.alpha = alpha;
  study.k = k;
  study.count_level = count_level;
  for (std::size_t i = 0; i < boxes.size(); ++i) {
    if (i > 0 && (boxes[i].lx < boxes[i - 1].lx || boxes[i].lt < boxes[i - 1].lt))
      throw std::invalid_argument("box_convergence_study: boxes must be nested");
    BoxStudyRow row;
    row.grid = boxes[i];
    const AssembledOperator op = assemble_operator(alpha, s, boxes[i]);
    row.dimension = op.matrix.dimension();
    row.spectrum = lanczos_lowest(op.matrix, k, tol, 200000, seed);
    row.spectrum.grid = boxes[i].describe();
    if (!row.spectrum.converged) throw std::runtime_error("box_convergence_study: Lanczos did not converge");
    if (i > 0) {
      const auto& prev = study.rows.back().spectrum.eigenvalues;
      for (std::size_t e = 0; e < row.spectrum.eigenvalues.size(); ++e)
        row.relative_change.push_back(std::abs(row.spectrum.eigenvalues[e] - prev[e]) /
                                      std::max(std::abs(prev[e]), 1e-300));
    }
    if (!std::isnan(count_level)) row.count = eigen_count_below(op.matrix, count_level, count_budget, tol, seed);
    study.rows.push_back(std::move(row));
  }
  return study;
}

}  // namespace srl
