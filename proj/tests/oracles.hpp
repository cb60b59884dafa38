#pragma once
// Independent oracles shared by the unit tests and the acceptance binary.

#include <Eigen/Dense>
#include <cmath>
#include <functional>

#include "srl/htype.hpp"
#include "srl/potential.hpp"
#include "srl/spectral.hpp"

namespace srl::oracle {

using ScalarField = std::function<double(const GroupPoint&)>;

// exp(h X_j) p = p . (h e_j, 0): X_j generates right translation along e_j.
inline GroupPoint flow(const MetivierStructure& s, const GroupPoint& p, int j, double h) {
  GroupPoint step = s.identity();
  step.x(j) = h;
  return multiply(s, p, step);
}

inline double xj(const MetivierStructure& s, const ScalarField& f, const GroupPoint& p, int j, double h) {
  return (f(flow(s, p, j, h)) - f(flow(s, p, j, -h))) / (2.0 * h);
}

inline double xj2(const MetivierStructure& s, const ScalarField& f, const GroupPoint& p, int j, double h) {
  return (f(flow(s, p, j, h)) - 2.0 * f(p) + f(flow(s, p, j, -h))) / (h * h);
}

inline double grad_sq(const MetivierStructure& s, const ScalarField& f, const GroupPoint& p, double h) {
  double acc = 0.0;
  for (int j = 0; j < s.horizontal_dim(); ++j) acc += std::pow(xj(s, f, p, j, h), 2);
  return acc;
}

inline double sub_laplacian(const MetivierStructure& s, const ScalarField& f, const GroupPoint& p, double h) {
  double acc = 0.0;
  for (int j = 0; j < s.horizontal_dim(); ++j) acc -= xj2(s, f, p, j, h);
  return acc;
}

// Dense H = sum over every face of row^T row plus diag(V), built face by face
// from the stencil definition on an index lattice extended by one layer.
inline Eigen::MatrixXd dense_operator(double alpha, const MetivierStructure& s, const BoxGrid& g,
                                      bool include_potential = true) {
  const int nh = s.horizontal_dim(), m = s.m(), dim = nh + m;
  std::vector<int> counts(dim);
  for (int a = 0; a < dim; ++a) counts[a] = a < nh ? g.nx : g.nt;
  long total = 1;
  for (int c : counts) total *= c;
  auto index_of = [&](const std::vector<int>& idx) -> long {
    long id = 0, stride = 1;
    for (int a = 0; a < dim; ++a) {
      if (idx[a] < 0 || idx[a] >= counts[a]) return -1;
      id += idx[a] * stride;
      stride *= counts[a];
    }
    return id;
  };
  Eigen::MatrixXd H = Eigen::MatrixXd::Zero(total, total);
  const double hx = g.hx(), ht = g.ht();
  for (int j = 0; j < nh; ++j) {
    // Face (i, i+1) along axis j is labelled by i in [-1, nx-1]; t indices run
    // over [-1, nt] so faces just outside the box are included.
    std::vector<int> lo(dim), hi(dim);
    for (int a = 0; a < dim; ++a) {
      lo[a] = a < nh ? (a == j ? -1 : 0) : -1;
      hi[a] = a < nh ? (a == j ? g.nx - 1 : g.nx - 1) : g.nt;
    }
    std::vector<int> idx = lo;
    while (true) {
      HorizontalVector x(nh);
      for (int a = 0; a < nh; ++a) x(a) = a == j ? -g.lx + (idx[a] + 1) * hx : g.x_node(idx[a]);
      Eigen::VectorXd row = Eigen::VectorXd::Zero(total);
      auto add = [&](std::vector<int> at, double c) {
        const long id = index_of(at);
        if (id >= 0) row(id) += c;
      };
      std::vector<int> minus = idx, plus = idx;
      plus[j] += 1;
      add(minus, -1.0 / hx);
      add(plus, 1.0 / hx);
      for (int k = 0; k < m; ++k) {
        const double a_jk = 0.5 * (s.map(k) * x)(j);
        for (const auto* base : {&minus, &plus}) {
          std::vector<int> up = *base, down = *base;
          up[nh + k] += 1;
          down[nh + k] -= 1;
          add(up, 0.5 * a_jk / (2.0 * ht));
          add(down, -0.5 * a_jk / (2.0 * ht));
        }
      }
      H += row * row.transpose();
      int a = 0;
      while (a < dim && ++idx[a] > hi[a]) {
        idx[a] = lo[a];
        ++a;
      }
      if (a == dim) break;
    }
  }
  if (include_potential) {
    std::vector<int> idx(dim, 0);
    for (long id = 0; id < total; ++id) {
      long rest = id;
      GroupPoint p = s.identity();
      for (int a = 0; a < dim; ++a) {
        const int i = static_cast<int>(rest % counts[a]);
        rest /= counts[a];
        if (a < nh) p.x(a) = g.x_node(i);
        else p.t(a - nh) = g.t_node(i);
      }
      H(id, id) += potential_value(alpha, s, p);
    }
  }
  return H;
}

// n = 2, m = 1 with J = diag(J_1, 2 J_1): singular values {1, 2}, not H-type.
inline MetivierStructure two_scale_structure() {
  HorizontalMatrix J = HorizontalMatrix::Zero(4, 4);
  J(0, 1) = 1.0;
  J(1, 0) = -1.0;
  J(2, 3) = 2.0;
  J(3, 2) = -2.0;
  return MetivierStructure(2, 1, {J});
}

}  // namespace srl::oracle
