#include "srl/sublevel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "srl/norms.hpp"
#include "srl/parallel.hpp"
#include "srl/sampling.hpp"

namespace srl {

namespace {

constexpr std::size_t kChunk = 4096;

PotentialConstants constants_for(const SublevelSpec& spec, const MetivierStructure& s) {
  ConditionEstimate est{1.0, 1.0, 0, 0};
  if (!s.h_type()) est = condition_from_singular_values(s, 4096, 0);
  return potential_bounds(spec.alpha, est, s);
}

double potential_at(const SublevelSpec& spec, const MetivierStructure& s, const GroupPoint& p) {
  if (spec.alpha >= 2.0 && p.x.squaredNorm() == 0.0) return 0.0;
  if (s.h_type()) {
    if (p.t.squaredNorm() == 0.0 && p.x.squaredNorm() == 0.0) throw std::domain_error("V undefined at the identity");
    return potential_htype_closed_form(spec.alpha, s, p);
  }
  return potential_value(spec.alpha, s, p);
}

// Euclidean distance from the origin to the box prod [lo_k, hi_k].
double distance_to_box(const CentralVector& lo, const CentralVector& hi) {
  double d2 = 0.0;
  for (int k = 0; k < lo.size(); ++k) {
    const double gap = std::max({0.0, lo(k), -hi(k)});
    d2 += gap * gap;
  }
  return std::sqrt(d2);
}

}  // namespace

double unit_ball_volume(int d) { return std::pow(M_PI, 0.5 * d) / std::tgamma(0.5 * d + 1.0); }

bool in_sublevel(const SublevelSpec& spec, const MetivierStructure& s, const GroupPoint& p) {
  if (!(spec.alpha > 0.0)) throw std::invalid_argument("alpha must be positive");
  s.check_point(p);
  return potential_at(spec, s, p) <= spec.M;
}

double cylinder_radius(const SublevelSpec& spec, const MetivierStructure& s, const ConditionEstimate& est) {
  const double a = spec.alpha;
  if (!(a > 2.0)) throw std::invalid_argument("cylinder_radius requires alpha > 2");
  const PotentialConstants k = potential_bounds(a, est, s);
  const double c1 = k.c_a1, c2 = k.c_a2;
  // g(N) = c1 N^{2a-4} - c2 N^{a-4}; for a > 4 it dips to its minimum at N*.
  const double n_star = a > 4.0 && c2 > 0.0 ? std::pow((a - 4.0) * c2 / ((2.0 * a - 4.0) * c1), 1.0 / a) : 0.0;
  auto g = [&](double N) { return c1 * std::pow(N, 2.0 * a - 4.0) - c2 * std::pow(N, a - 4.0); };
  auto f = [&](double u) { return u * u * g(std::max(u, n_star)); };
  // f decreases up to u_min and increases afterwards.
  const double u_min = c2 > 0.0 ? std::pow((a - 2.0) * c2 / ((2.0 * a - 2.0) * c1), 1.0 / a) : 0.0;
  if (f(u_min) > spec.M) return 0.0;
  double lo = u_min, hi = std::max(1.0, 2.0 * u_min);
  while (f(hi) <= spec.M) {
    lo = hi;
    hi *= 2.0;
  }
  for (int it = 0; it < 200 && hi - lo > 1e-14 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    (f(mid) <= spec.M ? lo : hi) = mid;
  }
  return hi;
}

VolumeEstimate ball_intersection_volume(const SublevelSpec& spec, const MetivierStructure& s,
                                        const GroupPoint& center, double r, std::int64_t n_samples,
                                        std::uint64_t seed) {
  if (!(r > 0.0)) throw std::invalid_argument("ball radius must be positive");
  if (n_samples < 1) throw std::invalid_argument("need at least one sample");
  s.check_point(center);
  const int h = s.horizontal_dim();
  VolumeEstimate out;
  out.samples = n_samples;

  // Box containing B(center, r): |q_x| < r, |q_t| < r^2/4 with p = center . q.
  HorizontalVector x_lo = center.x.array() - r, x_hi = center.x.array() + r;
  CentralVector t_lo(s.m()), t_hi(s.m());
  for (int k = 0; k < s.m(); ++k) {
    const double half = 0.25 * r * r + 0.5 * (s.map(k) * center.x).norm() * r;
    t_lo(k) = center.t(k) - half;
    t_hi(k) = center.t(k) + half;
  }
  // Far from the centre Omega is a thin tube around x = 0.
  if (spec.alpha > 2.0) {
    const PotentialConstants k = constants_for(spec, s);
    const double tau = distance_to_box(t_lo, t_hi);
    const double N_min = 2.0 * std::sqrt(tau);
    if (N_min > 0.0) {
      const double K = k.c_a1 - k.c_a2 / std::pow(N_min, spec.alpha);
      if (K > 0.0) {
        if (spec.M < 0.0) return out;
        const double rho = std::sqrt(spec.M / (std::pow(N_min, 2.0 * spec.alpha - 4.0) * K));
        x_lo = x_lo.cwiseMax(HorizontalVector::Constant(h, -rho));
        x_hi = x_hi.cwiseMin(HorizontalVector::Constant(h, rho));
      }
    }
  }
  double volume = 1.0;
  for (int i = 0; i < h; ++i) volume *= std::max(0.0, x_hi(i) - x_lo(i));
  for (int k = 0; k < s.m(); ++k) volume *= t_hi(k) - t_lo(k);
  out.sampled_volume = volume;
  if (volume == 0.0) return out;

  const BallSpec ball{center, r};
  const auto total = static_cast<std::size_t>(n_samples);
  const double hits = deterministic_sum(
      (total + kChunk - 1) / kChunk,
      [&](std::size_t c) {
        Rng rng = make_stream(seed, c);
        const std::size_t end = std::min(total, (c + 1) * kChunk);
        double count = 0.0;
        GroupPoint p = s.identity();
        for (std::size_t i = c * kChunk; i < end; ++i) {
          for (int a = 0; a < h; ++a) p.x(a) = uniform(rng, x_lo(a), x_hi(a));
          for (int k = 0; k < s.m(); ++k) p.t(k) = uniform(rng, t_lo(k), t_hi(k));
          if (in_ball(s, ball, p) && potential_at(spec, s, p) <= spec.M) count += 1.0;
        }
        return count;
      },
      1);
  out.hits = static_cast<std::int64_t>(hits);
  const double frac = hits / static_cast<double>(n_samples);
  out.value = volume * frac;
  out.std_error = volume * std::sqrt(frac * (1.0 - frac) / static_cast<double>(n_samples));
  return out;
}

ThinnessEstimate thinness_integral(const SublevelSpec& spec, const MetivierStructure& s, double r, double ell,
                                   double truncation_T, std::int64_t outer_samples, std::int64_t inner_samples,
                                   std::uint64_t seed) {
  const double a = spec.alpha;
  if (!(a > 2.0)) throw std::invalid_argument("thinness_integral requires alpha > 2");
  if (!(ell > 0.0)) throw std::invalid_argument("ell must be positive");
  if (!(r > 0.0) || !(truncation_T > 0.0)) throw std::invalid_argument("r and T must be positive");
  if (outer_samples < 1 || inner_samples < 1) throw std::invalid_argument("need at least one sample");
  const int h = s.horizontal_dim();
  const int m = s.m();
  const double n = s.n();

  ConditionEstimate est{1.0, 1.0, 0, 0};
  if (!s.h_type()) est = condition_from_singular_values(s, 4096, 0);
  const PotentialConstants k = potential_bounds(a, est, s);

  ThinnessEstimate out;
  out.alpha = a;
  out.M = spec.M;
  out.ell = ell;
  out.r = r;
  out.outer_samples = outer_samples;
  out.inner_samples = inner_samples;
  out.truncation_T = truncation_T;
  out.seed = seed;
  out.cylinder_c = cylinder_radius(spec, s, est);
  out.divergent = ell * n * (a - 2.0) <= m;

  // Half-width in t of B(y, r) around t_y for |x_y| <= c.
  const double R_t = 0.25 * r * r + 0.5 * std::sqrt(k.C0) * out.cylinder_c * r;
  const double ratio = k.c_a2 > 0.0 ? 2.0 * k.c_a2 / k.c_a1 : 0.0;
  out.threshold_k = R_t * R_t + std::pow(ratio, 2.0 / a);

  const double outer_volume = unit_ball_volume(h) * std::pow(out.cylinder_c, h) * unit_ball_volume(m) *
                              std::pow(truncation_T, m);
  const double inner_box = std::pow(2.0 * r, h) * std::pow(0.5 * r * r, m);

  // Tail over |t| > T: for |t_y| >= T_eff every point of B(y, r) has
  // |t| >= |t_y|/2, N >= sqrt(2|t_y|) and c_a1 - c_a2/N^a >= K > 0, hence
  // |x|^2 <= M / (K (2|t_y|)^{a-2}) on Omega cap B(y, r).
  if (out.cylinder_c == 0.0) {
    out.tail_bound = 0.0;
  } else if (out.divergent) {
    out.tail_bound = std::numeric_limits<double>::infinity();
  } else {
    const double T_eff = std::max({truncation_T, 2.0 * R_t, 0.5 * std::pow(ratio, 2.0 / a), out.threshold_k});
    const double K = k.c_a1 - k.c_a2 / std::pow(2.0 * T_eff, 0.5 * a);
    const double M_pos = std::max(spec.M, 0.0);
    const double A0 = unit_ball_volume(h) * std::pow(M_pos / K, n) * std::pow(2.0, -n * (a - 2.0)) *
                      std::pow(2.0 * R_t, m);
    const double decay = ell * n * (a - 2.0);
    const double cross_section = unit_ball_volume(h) * std::pow(out.cylinder_c, h);
    double tail = cross_section * std::pow(A0, ell) * m * unit_ball_volume(m) * std::pow(T_eff, m - decay) /
                  (decay - m);
    // Between T and T_eff only |Omega cap B| <= |box of B(y, r)| is used.
    tail += cross_section * unit_ball_volume(m) * (std::pow(T_eff, m) - std::pow(truncation_T, m)) *
            std::pow(inner_box, ell);
    out.tail_bound = tail;
  }
  if (out.cylinder_c == 0.0) return out;

  struct Moments {
    double sum = 0.0;
    double sum_sq = 0.0;
  };
  const auto total = static_cast<std::size_t>(outer_samples);
  std::vector<Moments> parts(total);
  parallel_for(total, [&](std::size_t i) {
    Rng rng = make_stream(seed, i);
    GroupPoint y = s.identity();
    y.x = out.cylinder_c * std::pow(uniform(rng, 0.0, 1.0), 1.0 / h) * unit_vector<HorizontalVector>(rng, h);
    y.t = truncation_T * std::pow(uniform(rng, 0.0, 1.0), 1.0 / m) * unit_vector<CentralVector>(rng, m);
    if (potential_at(spec, s, y) > spec.M) return;
    // z uniform in the box of B(0, r); y . z is uniform in y . box.
    std::int64_t hits = 0;
    GroupPoint z = s.identity();
    for (std::int64_t j = 0; j < inner_samples; ++j) {
      for (int c = 0; c < h; ++c) z.x(c) = uniform(rng, -r, r);
      for (int c = 0; c < m; ++c) z.t(c) = uniform(rng, -0.25 * r * r, 0.25 * r * r);
      if (kaplan_norm(s, z) >= r) continue;
      if (potential_at(spec, s, multiply(s, y, z)) <= spec.M) ++hits;
    }
    const double measure = inner_box * static_cast<double>(hits) / static_cast<double>(inner_samples);
    const double term = std::pow(measure, ell);
    parts[i] = {term, term * term};
  });
  const double sum = pairwise_sum([&] {
    std::vector<double> v(total);
    for (std::size_t i = 0; i < total; ++i) v[i] = parts[i].sum;
    return v;
  }());
  const double sum_sq = pairwise_sum([&] {
    std::vector<double> v(total);
    for (std::size_t i = 0; i < total; ++i) v[i] = parts[i].sum_sq;
    return v;
  }());
  const double N = static_cast<double>(outer_samples);
  const double mean = sum / N;
  const double var = std::max(0.0, sum_sq / N - mean * mean);
  out.value = outer_volume * mean;
  out.std_error = outer_volume * std::sqrt(var / N);
  return out;
}

ScalingFit scaling_fit(const SublevelSpec& spec, const MetivierStructure& s, double r,
                       const std::vector<double>& t_values, std::int64_t samples, std::uint64_t seed) {
  if (!(spec.alpha > 2.0)) throw std::invalid_argument("scaling_fit requires alpha > 2");
  if (t_values.size() < 4) throw std::invalid_argument("scaling_fit needs at least four t values");
  const PotentialConstants k = constants_for(spec, s);
  ScalingFit fit;
  fit.t_values = t_values;
  const double R_t = 0.25 * r * r;
  fit.threshold_k = R_t * R_t + std::pow(std::max(0.0, 2.0 * k.c_a2 / k.c_a1), 2.0 / spec.alpha);

  // Weighted least squares of log V against log t, weights from MC errors.
  double sw = 0.0, sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < t_values.size(); ++i) {
    GroupPoint center = s.identity();
    center.t(0) = t_values[i];
    const VolumeEstimate v = ball_intersection_volume(spec, s, center, r, samples, seed + i);
    if (v.hits == 0) throw std::runtime_error("scaling_fit: no Monte-Carlo hits; increase samples");
    fit.volumes.push_back(v);
    const double sigma = v.std_error / v.value;
    const double w = 1.0 / std::max(sigma * sigma, 1e-300);
    const double x = std::log(t_values[i]), y = std::log(v.value);
    sw += w;
    sx += w * x;
    sy += w * y;
    sxx += w * x * x;
    sxy += w * x * y;
  }
  const double det = sw * sxx - sx * sx;
  fit.slope = (sw * sxy - sx * sy) / det;
  fit.intercept = (sxx * sy - sx * sxy) / det;
  const double se = std::sqrt(sw / det);
  fit.slope_ci_low = fit.slope - 1.96 * se;
  fit.slope_ci_high = fit.slope + 1.96 * se;
  return fit;
}

}  // namespace srl
