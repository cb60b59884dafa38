#include "srl/htype.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "srl/sampling.hpp"

namespace srl {

GroupPoint make_point(std::initializer_list<double> x, std::initializer_list<double> t) {
  GroupPoint p;
  p.x.resize(static_cast<Eigen::Index>(x.size()));
  p.t.resize(static_cast<Eigen::Index>(t.size()));
  std::copy(x.begin(), x.end(), p.x.data());
  std::copy(t.begin(), t.end(), p.t.data());
  return p;
}

MetivierStructure::MetivierStructure(int n, int m, std::vector<HorizontalMatrix> maps)
    : n_(n), m_(m), maps_(std::move(maps)) {
  if (n < 1 || n > kMaxHalfHorizontal) throw std::invalid_argument("n must lie in [1, 8]");
  if (m < 1 || m > kMaxCentral) throw std::invalid_argument("m must lie in [1, 8]");
  if (static_cast<int>(maps_.size()) != m) throw std::invalid_argument("expected m skew maps");
  const int d = 2 * n;
  for (const auto& J : maps_) {
    if (J.rows() != d || J.cols() != d) throw std::invalid_argument("skew maps must be 2n x 2n");
    if ((J + J.transpose()).cwiseAbs().maxCoeff() > 1e-14)
      throw std::invalid_argument("map is not skew-symmetric");
  }
  const HorizontalMatrix eye = HorizontalMatrix::Identity(d, d);
  h_type_ = true;
  for (int k = 0; k < m && h_type_; ++k) {
    if ((maps_[k] * maps_[k] + eye).cwiseAbs().maxCoeff() > 1e-12) h_type_ = false;
    for (int l = k + 1; l < m && h_type_; ++l) {
      if ((maps_[k] * maps_[l] + maps_[l] * maps_[k]).cwiseAbs().maxCoeff() > 1e-12) h_type_ = false;
    }
  }
}

HorizontalMatrix MetivierStructure::map_at(const CentralVector& t) const {
  HorizontalMatrix Jt = HorizontalMatrix::Zero(2 * n_, 2 * n_);
  for (int k = 0; k < m_; ++k) Jt += t(k) * maps_[k];
  return Jt;
}

GroupPoint MetivierStructure::identity() const {
  return GroupPoint{HorizontalVector::Zero(2 * n_), CentralVector::Zero(m_)};
}

void MetivierStructure::check_point(const GroupPoint& p) const {
  if (p.x.size() != 2 * n_ || p.t.size() != m_)
    throw std::invalid_argument("point dimensions do not match the structure");
}

MetivierStructure make_heisenberg() {
  HorizontalMatrix J(2, 2);
  J << 0.0, 1.0, -1.0, 0.0;
  return MetivierStructure(1, 1, {J});
}

ConditionEstimate verify_metivier(const MetivierStructure& s, std::int64_t samples, std::uint64_t seed) {
  if (samples < 1) throw std::invalid_argument("verify_metivier needs at least one sample");
  Rng rng = make_stream(seed, 0);
  ConditionEstimate est{std::numeric_limits<double>::infinity(), 0.0, samples, seed};
  for (std::int64_t i = 0; i < samples; ++i) {
    auto x = unit_vector<HorizontalVector>(rng, s.horizontal_dim());
    auto t = unit_vector<CentralVector>(rng, s.m());
    double v = (s.map_at(t) * x).squaredNorm();
    est.c0 = std::min(est.c0, v);
    est.C0 = std::max(est.C0, v);
  }
  return est;
}

ConditionEstimate condition_from_singular_values(const MetivierStructure& s, std::int64_t t_samples,
                                                 std::uint64_t seed) {
  if (t_samples < 1) throw std::invalid_argument("need at least one central sample");
  ConditionEstimate est{std::numeric_limits<double>::infinity(), 0.0, t_samples, seed};
  auto scan = [&](const CentralVector& t) {
    Eigen::MatrixXd Jt = s.map_at(t);
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(Jt);
    const auto& sv = svd.singularValues();
    est.c0 = std::min(est.c0, sv.minCoeff() * sv.minCoeff());
    est.C0 = std::max(est.C0, sv.maxCoeff() * sv.maxCoeff());
  };
  if (s.m() == 1) {
    // The unit sphere of R^1 is {+1, -1}; both give the same singular values.
    scan(CentralVector::Ones(1));
    est.sample_count = 1;
    return est;
  }
  Rng rng = make_stream(seed, 1);
  for (int k = 0; k < s.m(); ++k) scan(CentralVector::Unit(s.m(), k));
  for (std::int64_t i = 0; i < t_samples; ++i) scan(unit_vector<CentralVector>(rng, s.m()));
  return est;
}

GroupPoint multiply(const MetivierStructure& s, const GroupPoint& p, const GroupPoint& q) {
  s.check_point(p);
  s.check_point(q);
  GroupPoint r{p.x + q.x, p.t + q.t};
  for (int k = 0; k < s.m(); ++k) r.t(k) += 0.5 * q.x.dot(s.map(k) * p.x);
  return r;
}

GroupPoint inverse(const MetivierStructure& s, const GroupPoint& p) {
  s.check_point(p);
  return GroupPoint{-p.x, -p.t};
}

GroupPoint dilate(const MetivierStructure& s, double r, const GroupPoint& p) {
  if (!(r > 0.0)) throw std::invalid_argument("dilation factor must be positive");
  s.check_point(p);
  return GroupPoint{r * p.x, (r * r) * p.t};
}

int homogeneous_dimension(const MetivierStructure& s) { return 2 * s.n() + 2 * s.m(); }

std::string to_json(const MetivierStructure& s) {
  nlohmann::json j;
  j["n"] = s.n();
  j["m"] = s.m();
  auto maps = nlohmann::json::array();
  for (const auto& J : s.maps()) {
    std::vector<double> flat;
    for (int r = 0; r < J.rows(); ++r)
      for (int c = 0; c < J.cols(); ++c) flat.push_back(J(r, c));
    maps.push_back(flat);
  }
  j["J"] = maps;
  j["h_type"] = s.h_type();
  return j.dump();
}

MetivierStructure structure_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("structure JSON: ") + e.what());
  }
  for (const char* key : {"n", "m", "J"})
    if (!j.contains(key)) throw std::invalid_argument(std::string("structure JSON: missing key ") + key);
  const int n = j.at("n").get<int>();
  const int m = j.at("m").get<int>();
  const int d = 2 * n;
  std::vector<HorizontalMatrix> maps;
  for (const auto& flat : j.at("J")) {
    auto values = flat.get<std::vector<double>>();
    if (static_cast<int>(values.size()) != d * d)
      throw std::invalid_argument("structure JSON: each J must hold (2n)^2 entries");
    HorizontalMatrix J(d, d);
    for (int r = 0; r < d; ++r)
      for (int c = 0; c < d; ++c) J(r, c) = values[static_cast<std::size_t>(r * d + c)];
    maps.push_back(J);
  }
  MetivierStructure s(n, m, std::move(maps));
  if (j.value("h_type", false) && !s.h_type())
    throw std::invalid_argument("structure JSON claims h_type but J_t^2 != -|t|^2 I");
  return s;
}

MetivierStructure load_structure(const std::string& path_or_builtin) {
  if (path_or_builtin == "heisenberg") return make_heisenberg();
  std::ifstream in(path_or_builtin);
  if (!in) throw std::invalid_argument("cannot open structure file: " + path_or_builtin);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return structure_from_json(buffer.str());
}

}  // namespace srl
