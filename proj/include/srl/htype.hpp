#pragma once

// Two-step (Metivier) groups realised as R^{2n} x R^m in exponential
// coordinates, with the group law
//   (x,t).(x',t') = (x + x', t + t' + 1/2 sum_k (J_k x, x') u_k).

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace srl {

inline constexpr int kMaxHalfHorizontal = 8;  // n
inline constexpr int kMaxCentral = 8;         // m
inline constexpr int kMaxHorizontal = 2 * kMaxHalfHorizontal;

// Small fixed-capacity storage: no heap traffic in sampling loops.
using HorizontalVector = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, kMaxHorizontal, 1>;
using CentralVector = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, kMaxCentral, 1>;
using HorizontalMatrix =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, kMaxHorizontal, kMaxHorizontal>;

struct GroupPoint {
  HorizontalVector x;
  CentralVector t;
};

GroupPoint make_point(std::initializer_list<double> x, std::initializer_list<double> t);

class MetivierStructure {
 public:
  // Throws std::invalid_argument unless every map is a 2n x 2n skew matrix
  // (|J + J^T| <= 1e-14 entrywise). Degenerate structures are accepted here;
  // verify_metivier() is the place that detects them.
  MetivierStructure(int n, int m, std::vector<HorizontalMatrix> maps);

  int n() const { return n_; }
  int m() const { return m_; }
  int horizontal_dim() const { return 2 * n_; }
  int dim() const { return 2 * n_ + m_; }

  const HorizontalMatrix& map(int k) const { return maps_[static_cast<std::size_t>(k)]; }
  const std::vector<HorizontalMatrix>& maps() const { return maps_; }

  // J_t = sum_k t_k J_k.
  HorizontalMatrix map_at(const CentralVector& t) const;

  // True when J_t^2 = -|t|^2 I for all t, checked through the Clifford
  // relations J_k^2 = -I, J_k J_l + J_l J_k = 0 (k != l) to 1e-12.
  bool h_type() const { return h_type_; }

  GroupPoint identity() const;
  void check_point(const GroupPoint& p) const;

 private:
  int n_;
  int m_;
  std::vector<HorizontalMatrix> maps_;
  bool h_type_ = false;
};

// n = m = 1, J = [[0, 1], [-1, 0]], so X_1 = d_{x1} + (x2/2) d_t and
// X_2 = d_{x2} - (x1/2) d_t.
MetivierStructure make_heisenberg();

// Sampled extremes of |J_t x|^2 over unit x and unit t.
struct ConditionEstimate {
  double c0 = 0.0;
  double C0 = 0.0;
  std::int64_t sample_count = 0;
  std::uint64_t seed = 0;
};

ConditionEstimate verify_metivier(const MetivierStructure& s, std::int64_t samples, std::uint64_t seed);

// Same quantity, but for each sampled unit t the extremes over unit x are
// taken exactly from the singular values of J_t. Exact when m = 1.
ConditionEstimate condition_from_singular_values(const MetivierStructure& s, std::int64_t t_samples,
                                                 std::uint64_t seed);

GroupPoint multiply(const MetivierStructure& s, const GroupPoint& p, const GroupPoint& q);
GroupPoint inverse(const MetivierStructure& s, const GroupPoint& p);
GroupPoint dilate(const MetivierStructure& s, double r, const GroupPoint& p);
int homogeneous_dimension(const MetivierStructure& s);

// Serialized as {"n", "m", "J": [[row-major 2n*2n] ...], "h_type"}.
std::string to_json(const MetivierStructure& s);
MetivierStructure structure_from_json(const std::string& text);
MetivierStructure load_structure(const std::string& path_or_builtin);

}  // namespace srl
