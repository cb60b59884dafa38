#include "srl/norms.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "srl/sampling.hpp"

namespace srl {

double kaplan_norm(const MetivierStructure& s, const GroupPoint& p) {
  s.check_point(p);
  const double x2 = p.x.squaredNorm();
  return std::sqrt(std::sqrt(x2 * x2 + 16.0 * p.t.squaredNorm()));
}

double quasi_distance(const MetivierStructure& s, const GroupPoint& p, const GroupPoint& q) {
  return kaplan_norm(s, multiply(s, inverse(s, p), q));
}

double weight(double alpha, const MetivierStructure& s, const GroupPoint& p) {
  if (!(alpha > 0.0)) throw std::invalid_argument("weight: alpha must be positive");
  return std::exp(-std::pow(kaplan_norm(s, p), alpha));
}

bool in_ball(const MetivierStructure& s, const BallSpec& ball, const GroupPoint& p) {
  if (!(ball.radius > 0.0)) throw std::invalid_argument("ball radius must be positive");
  return quasi_distance(s, ball.center, p) < ball.radius;
}

double gamma_ratio(const MetivierStructure& s, const GroupPoint& p, const GroupPoint& q) {
  const double denom = kaplan_norm(s, p) + kaplan_norm(s, q);
  if (denom == 0.0) return 0.0;
  return kaplan_norm(s, multiply(s, p, q)) / denom;
}

GammaEstimate estimate_gamma(const MetivierStructure& s, std::int64_t samples, std::uint64_t seed) {
  if (samples < 1) throw std::invalid_argument("estimate_gamma needs at least one sample");
  // Pair i is drawn from its own substream, so a longer run extends a shorter
  // one and gamma_hat is monotone in the sample count.
  GammaEstimate est{1.0, samples, seed};
  for (std::int64_t i = 0; i < samples; ++i) {
    Rng rng = make_stream(seed, static_cast<std::uint64_t>(i));
    // Random directions on the unit Kaplan sphere, with independent radii.
    auto draw = [&] {
      const double r = std::exp(uniform(rng, std::log(1e-2), std::log(1e2)));
      const double theta = uniform(rng, 0.0, 0.5 * M_PI);
      // |x|^4 = cos(theta), 16|t|^2 = sin(theta) on the unit sphere.
      auto x = unit_vector<HorizontalVector>(rng, s.horizontal_dim());
      auto t = unit_vector<CentralVector>(rng, s.m());
      GroupPoint p{x * std::pow(std::cos(theta), 0.25), t * (0.25 * std::sqrt(std::sin(theta)))};
      return dilate(s, r, p);
    };
    GroupPoint p = draw();
    GroupPoint q = draw();
    est.gamma_hat = std::max(est.gamma_hat, gamma_ratio(s, p, q));
  }
  return est;
}

}  // namespace srl
