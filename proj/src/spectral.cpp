#include "srl/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "srl/norms.hpp"
#include "srl/parallel.hpp"
#include "srl/potential.hpp"

namespace srl {

void BoxGrid::validate() const {
  if (nx < 3 || nt < 3) throw std::invalid_argument("box grid needs at least 3 points per axis");
  if (!(lx > 0.0) || !(lt > 0.0)) throw std::invalid_argument("box half-widths must be positive");
  if (nx % 2 == 1 && nt % 2 == 1) throw std::invalid_argument("odd nx and nt put the identity on a node");
}

std::size_t BoxGrid::node_count(const MetivierStructure& s) const {
  std::size_t count = 1;
  for (int a = 0; a < s.horizontal_dim(); ++a) count *= static_cast<std::size_t>(nx);
  for (int k = 0; k < s.m(); ++k) count *= static_cast<std::size_t>(nt);
  return count;
}

std::string BoxGrid::describe() const {
  std::ostringstream out;
  out.precision(17);
  out << "lx=" << lx << " lt=" << lt << " nx=" << nx << " nt=" << nt;
  return out.str();
}

void CsrMatrix::apply(const double* in, double* out) const {
  // Row blocks are independent and each row is summed in a fixed order.
  constexpr std::size_t kBlock = 2048;
  parallel_for((rows + kBlock - 1) / kBlock, [&](std::size_t b) {
    const std::size_t end = std::min(rows, (b + 1) * kBlock);
    for (std::size_t r = b * kBlock; r < end; ++r) {
      double acc = 0.0;
      for (std::size_t e = row_offsets[r]; e < row_offsets[r + 1]; ++e) acc += values[e] * in[col_indices[e]];
      out[r] = acc;
    }
  });
}

Eigen::VectorXd CsrMatrix::apply(const Eigen::VectorXd& in) const {
  if (static_cast<std::size_t>(in.size()) != cols) throw std::invalid_argument("CsrMatrix::apply: size mismatch");
  Eigen::VectorXd out(static_cast<Eigen::Index>(rows));
  apply(in.data(), out.data());
  return out;
}

Eigen::MatrixXd CsrMatrix::to_dense() const {
  Eigen::MatrixXd dense = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t e = row_offsets[r]; e < row_offsets[r + 1]; ++e)
      dense(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(col_indices[e])) += values[e];
  return dense;
}

double CsrMatrix::entry(std::size_t r, std::size_t c) const {
  const auto begin = col_indices.begin() + static_cast<std::ptrdiff_t>(row_offsets[r]);
  const auto end = col_indices.begin() + static_cast<std::ptrdiff_t>(row_offsets[r + 1]);
  const auto it = std::lower_bound(begin, end, c);
  if (it == end || *it != c) return 0.0;
  return values[static_cast<std::size_t>(it - col_indices.begin())];
}

double SparseSymmetricOperator::asymmetry() const {
  if (rows != cols) return std::numeric_limits<double>::infinity();
  double worst = 0.0;
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t e = row_offsets[r]; e < row_offsets[r + 1]; ++e)
      worst = std::max(worst, std::abs(values[e] - entry(col_indices[e], r)));
  return worst;
}

namespace {

struct Lattice {
  int h = 0;
  int d = 0;
  std::vector<int> counts;

  Lattice(const MetivierStructure& s, const BoxGrid& grid) : h(s.horizontal_dim()), d(s.dim()) {
    for (int a = 0; a < d; ++a) counts.push_back(a < h ? grid.nx : grid.nt);
  }

  bool inside(const std::vector<int>& idx) const {
    for (int a = 0; a < d; ++a)
      if (idx[static_cast<std::size_t>(a)] < 0 || idx[static_cast<std::size_t>(a)] >= counts[static_cast<std::size_t>(a)])
        return false;
    return true;
  }

  std::size_t flat(const std::vector<int>& idx) const {
    std::size_t out = 0;
    for (int a = d - 1; a >= 0; --a)
      out = out * static_cast<std::size_t>(counts[static_cast<std::size_t>(a)]) +
            static_cast<std::size_t>(idx[static_cast<std::size_t>(a)]);
    return out;
  }
};

struct ActiveSet {
  std::vector<std::ptrdiff_t> row_of;  // grid node -> active row, -1 if removed
  std::vector<std::size_t> nodes;
};

ActiveSet active_nodes(const MetivierStructure& s, const BoxGrid& grid, const OperatorOptions& options) {
  ActiveSet set;
  const std::size_t total = grid.node_count(s);
  set.row_of.assign(total, -1);
  for (std::size_t i = 0; i < total; ++i) {
    if (std::isfinite(options.clamp_radius) && kaplan_norm(s, grid_node(s, grid, i)) > options.clamp_radius) continue;
    set.row_of[i] = static_cast<std::ptrdiff_t>(set.nodes.size());
    set.nodes.push_back(i);
  }
  return set;
}

DerivativeFactor derivative_rows(const MetivierStructure& s, const BoxGrid& grid, int j, const ActiveSet& active) {
  const Lattice lat(s, grid);
  const int h = lat.h;
  const double hx = grid.hx(), ht = grid.ht();
  DerivativeFactor out;
  out.matrix.cols = active.nodes.size();

  // Extended ranges: faces -1..nx-1 along x_j, ghost layers -1..nt along t.
  std::vector<int> lo(static_cast<std::size_t>(lat.d)), hi(static_cast<std::size_t>(lat.d));
  for (int a = 0; a < lat.d; ++a) {
    lo[static_cast<std::size_t>(a)] = (a == j || a >= h) ? -1 : 0;
    hi[static_cast<std::size_t>(a)] = a == j ? grid.nx - 1 : (a >= h ? grid.nt : grid.nx - 1);
  }
  std::vector<int> idx = lo;
  std::vector<std::pair<std::size_t, double>> entries;
  bool done = false;
  while (!done) {
    GroupPoint face{HorizontalVector(h), CentralVector(s.m())};
    for (int a = 0; a < h; ++a) face.x(a) = grid.x_node(idx[static_cast<std::size_t>(a)]);
    face.x(j) += 0.5 * hx;
    for (int k = 0; k < s.m(); ++k) face.t(k) = grid.t_node(idx[static_cast<std::size_t>(h + k)]);

    entries.clear();
    bool interior = true;
    auto put = [&](std::vector<int> node, double w) {
      if (!lat.inside(node)) {
        interior = false;
        return;
      }
      const std::ptrdiff_t row = active.row_of[lat.flat(node)];
      if (row < 0) {
        interior = false;
        return;
      }
      entries.emplace_back(static_cast<std::size_t>(row), w);
    };
    std::vector<int> node = idx;
    put(node, -1.0 / hx);
    node[static_cast<std::size_t>(j)] += 1;
    put(node, 1.0 / hx);
    for (int k = 0; k < s.m(); ++k) {
      const double a = 0.5 * (s.map(k).row(j).dot(face.x));
      if (a == 0.0) continue;
      const double w = 0.25 * a / ht;
      for (int side = 0; side < 2; ++side) {
        std::vector<int> n2 = idx;
        n2[static_cast<std::size_t>(j)] += side;
        n2[static_cast<std::size_t>(h + k)] += 1;
        put(n2, w);
        n2[static_cast<std::size_t>(h + k)] -= 2;
        put(n2, -w);
      }
    }
    if (!entries.empty()) {
      std::sort(entries.begin(), entries.end());
      for (std::size_t e = 0; e < entries.size(); ++e) {
        if (!out.matrix.col_indices.empty() && out.matrix.row_offsets.back() < out.matrix.col_indices.size() &&
            out.matrix.col_indices.back() == entries[e].first) {
          out.matrix.values.back() += entries[e].second;
        } else {
          out.matrix.col_indices.push_back(entries[e].first);
          out.matrix.values.push_back(entries[e].second);
        }
      }
      out.matrix.row_offsets.push_back(out.matrix.col_indices.size());
      ++out.matrix.rows;
      out.faces.push_back(face);
      out.interior.push_back(interior);
    }

    for (int a = 0;; ++a) {
      if (a == lat.d) {
        done = true;
        break;
      }
      auto& v = idx[static_cast<std::size_t>(a)];
      if (++v <= hi[static_cast<std::size_t>(a)]) break;
      v = lo[static_cast<std::size_t>(a)];
    }
  }
  return out;
}

}  // namespace

GroupPoint grid_node(const MetivierStructure& s, const BoxGrid& grid, std::size_t index) {
  const int h = s.horizontal_dim();
  GroupPoint p{HorizontalVector(h), CentralVector(s.m())};
  for (int a = 0; a < h; ++a) {
    p.x(a) = grid.x_node(static_cast<int>(index % static_cast<std::size_t>(grid.nx)));
    index /= static_cast<std::size_t>(grid.nx);
  }
  for (int k = 0; k < s.m(); ++k) {
    p.t(k) = grid.t_node(static_cast<int>(index % static_cast<std::size_t>(grid.nt)));
    index /= static_cast<std::size_t>(grid.nt);
  }
  return p;
}

DerivativeFactor assemble_derivative(const MetivierStructure& s, const BoxGrid& grid, int j,
                                     const OperatorOptions& options) {
  if (j < 0 || j >= s.horizontal_dim()) throw std::out_of_range("assemble_derivative: index out of range");
  grid.validate();
  return derivative_rows(s, grid, j, active_nodes(s, grid, options));
}

AssembledOperator assemble_operator(double alpha, const MetivierStructure& s, const BoxGrid& grid,
                                    const OperatorOptions& options) {
  grid.validate();
  if (options.include_potential && !(alpha > 0.0)) throw std::invalid_argument("alpha must be positive");
  const ActiveSet active = active_nodes(s, grid, options);
  const std::size_t dim = active.nodes.size();
  if (dim == 0) throw std::invalid_argument("no active nodes");

  // All face rows, stacked in a fixed order, and their transpose.
  CsrMatrix D;
  D.cols = dim;
  for (int j = 0; j < s.horizontal_dim(); ++j) {
    const DerivativeFactor f = derivative_rows(s, grid, j, active);
    const std::size_t base = D.values.size();
    D.col_indices.insert(D.col_indices.end(), f.matrix.col_indices.begin(), f.matrix.col_indices.end());
    D.values.insert(D.values.end(), f.matrix.values.begin(), f.matrix.values.end());
    for (std::size_t r = 1; r <= f.matrix.rows; ++r) D.row_offsets.push_back(base + f.matrix.row_offsets[r]);
    D.rows += f.matrix.rows;
  }
  std::vector<std::size_t> t_offsets(dim + 1, 0);
  for (std::size_t c : D.col_indices) ++t_offsets[c + 1];
  for (std::size_t c = 0; c < dim; ++c) t_offsets[c + 1] += t_offsets[c];
  std::vector<std::size_t> t_rows(D.nonzeros()), t_pos(D.nonzeros());
  {
    std::vector<std::size_t> fill(t_offsets.begin(), t_offsets.end() - 1);
    for (std::size_t r = 0; r < D.rows; ++r)
      for (std::size_t e = D.row_offsets[r]; e < D.row_offsets[r + 1]; ++e) {
        const std::size_t slot = fill[D.col_indices[e]]++;
        t_rows[slot] = r;
        t_pos[slot] = e;
      }
  }

  AssembledOperator out;
  out.active = active.nodes;
  out.potential.assign(dim, 0.0);
  if (options.include_potential)
    parallel_for(dim, [&](std::size_t i) { out.potential[i] = potential_value(alpha, s, grid_node(s, grid, active.nodes[i])); });

  // Row i of sum D^T D: face rows containing i visited in increasing order,
  // so entries (i, c) and (c, i) are summed identically.
  std::vector<std::vector<std::pair<std::size_t, double>>> rows(dim);
  parallel_for(dim, [&](std::size_t i) {
    std::vector<std::pair<std::size_t, double>> terms;
    for (std::size_t slot = t_offsets[i]; slot < t_offsets[i + 1]; ++slot) {
      const std::size_t r = t_rows[slot];
      const double vi = D.values[t_pos[slot]];
      for (std::size_t e = D.row_offsets[r]; e < D.row_offsets[r + 1]; ++e)
        terms.emplace_back(D.col_indices[e], vi * D.values[e]);
    }
    std::stable_sort(terms.begin(), terms.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    auto& row = rows[i];
    for (const auto& [c, v] : terms) {
      if (!row.empty() && row.back().first == c)
        row.back().second += v;
      else
        row.emplace_back(c, v);
    }
    for (auto& [c, v] : row)
      if (c == i) v += out.potential[i];
  });

  auto& H = out.matrix;
  H.rows = H.cols = dim;
  for (std::size_t i = 0; i < dim; ++i) {
    for (const auto& [c, v] : rows[i]) {
      H.col_indices.push_back(c);
      H.values.push_back(v);
    }
    H.row_offsets.push_back(H.col_indices.size());
  }
  return out;
}

}  // namespace srl
