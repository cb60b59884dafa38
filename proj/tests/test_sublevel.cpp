#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "srl/potential.hpp"
#include "srl/sampling.hpp"
#include "srl/sublevel.hpp"

using namespace srl;

TEST_CASE("sublevel membership") {
  const MetivierStructure s = make_heisenberg();
  CHECK(in_sublevel({3.0, 0.0}, s, make_point({0, 0}, {4})));
  CHECK_FALSE(in_sublevel({3.0, -0.1}, s, make_point({0, 0}, {4})));
  CHECK(in_sublevel({3.0, 0.0}, s, s.identity()));
  CHECK(potential_value(3.0, s, make_point({1, 0}, {0})) == doctest::Approx(-5.25));
  CHECK(in_sublevel({3.0, 0.0}, s, make_point({1, 0}, {0})));
  CHECK(potential_value(3.0, s, make_point({3, 0}, {0})) == doctest::Approx(20.25 * 9.0 - 22.5));
  CHECK_FALSE(in_sublevel({3.0, 0.0}, s, make_point({3, 0}, {0})));
  CHECK_THROWS_AS(in_sublevel({1.5, 0.0}, s, s.identity()), std::domain_error);
}

TEST_CASE("cylinder radius") {
  const MetivierStructure s = make_heisenberg();
  const ConditionEstimate est = condition_from_singular_values(s, 16, 0);
  const double c = cylinder_radius({4.0, 0.0}, s, est);
  CHECK(c >= std::pow(3.0, 0.25) - 1e-9);
  CHECK(c <= 1.5);
  CHECK(cylinder_radius({3.0, -1e6}, s, est) == 0.0);
  CHECK_THROWS_AS(cylinder_radius({2.0, 0.0}, s, est), std::invalid_argument);
  CHECK(cylinder_radius({3.0, 10.0}, s, est) > cylinder_radius({3.0, 1.0}, s, est));

  // Every sampled member of Omega lies inside the cylinder.
  for (double alpha : {2.5, 3.0, 4.0}) {
    const SublevelSpec spec{alpha, 10.0};
    const double radius = cylinder_radius(spec, s, est);
    std::int64_t members = 0;
    for (std::uint64_t i = 0; i < 100000; ++i) {
      Rng rng = make_stream(51, i);
      const GroupPoint p = box_point(rng, s.identity(), 2.0 * radius, 50.0);
      if (!in_sublevel(spec, s, p)) continue;
      ++members;
      CHECK(p.x.norm() <= radius);
    }
    CHECK(members > 100);
  }
}

TEST_CASE("ball intersection volume") {
  const MetivierStructure s = make_heisenberg();
  const GroupPoint e = s.identity();
  const VolumeEstimate empty = ball_intersection_volume({3.0, -1e6}, s, make_point({0.5, 0}, {8}), 1.0, 1000, 0);
  CHECK(empty.value == 0.0);
  CHECK(empty.hits == 0);

  // Whole group: the Kaplan ball has volume pi^2/8 r^4.
  const double kappa = M_PI * M_PI / 8.0;
  for (double r : {0.5, 1.0, 2.0}) {
    const VolumeEstimate v = ball_intersection_volume({3.0, 1e12}, s, e, r, 200000, 1);
    CHECK(std::abs(v.value / std::pow(r, 4) - kappa) <= 3.0 * v.std_error / std::pow(r, 4));
  }
  const VolumeEstimate away = ball_intersection_volume({3.0, 1e12}, s, make_point({3, -1}, {20}), 1.0, 200000, 2);
  CHECK(std::abs(away.value - kappa) <= 3.0 * away.std_error);

  const VolumeEstimate a = ball_intersection_volume({3.0, 10.0}, s, make_point({0.5, 0}, {16}), 1.0, 50000, 3);
  const VolumeEstimate b = ball_intersection_volume({3.0, 10.0}, s, make_point({0.5, 0}, {16}), 1.0, 50000, 3);
  CHECK(a.value == b.value);
  CHECK(a.hits > 0);
}

TEST_CASE("scaling fit") {
  const MetivierStructure s = make_heisenberg();
  const ScalingFit f = scaling_fit({3.0, 10.0}, s, 2.0, {32, 64, 128, 256}, 50000, 4);
  CHECK(f.slope == doctest::Approx(-1.0).epsilon(0.15));
  CHECK(f.slope_ci_low <= f.slope);
  CHECK(f.slope_ci_high >= f.slope);
  CHECK(f.volumes.size() == 4);
  const ScalingFit f4 = scaling_fit({4.0, 10.0}, s, 2.0, {32, 64, 128, 256}, 50000, 4);
  CHECK(std::abs(f4.slope + 2.0) <= 0.2);
  CHECK_THROWS_AS(scaling_fit({3.0, 10.0}, s, 2.0, {32, 64, 128}, 1000, 4), std::invalid_argument);
  CHECK_THROWS_AS(scaling_fit({3.0, -1e6}, s, 2.0, {32, 64, 128, 256}, 1000, 4), std::runtime_error);
}

TEST_CASE("thinness integral") {
  const MetivierStructure s = make_heisenberg();
  const ThinnessEstimate empty = thinness_integral({3.0, -1e6}, s, 1.0, 2.0, 16.0, 1000, 100, 0);
  CHECK(empty.value == 0.0);
  CHECK(empty.tail_bound == 0.0);

  const ThinnessEstimate t16 = thinness_integral({3.0, 10.0}, s, 1.0, 2.0, 16.0, 4000, 400, 0);
  const ThinnessEstimate t64 = thinness_integral({3.0, 10.0}, s, 1.0, 2.0, 64.0, 4000, 400, 0);
  CHECK_FALSE(t16.divergent);
  CHECK(std::isfinite(t16.tail_bound));
  CHECK(t64.tail_bound < t16.tail_bound);
  CHECK(t16.value > 0.0);
  CHECK(t16.std_error > 0.0);

  const ThinnessEstimate half = thinness_integral({3.0, 10.0}, s, 1.0, 0.5, 16.0, 100, 10, 0);
  CHECK(half.divergent);
  CHECK(std::isinf(half.tail_bound));
  const ThinnessEstimate edge = thinness_integral({3.0, 10.0}, s, 1.0, 1.0, 16.0, 100, 10, 0);
  CHECK(edge.divergent);
  CHECK_THROWS_AS(thinness_integral({2.0, 10.0}, s, 1.0, 2.0, 16.0, 100, 10, 0), std::invalid_argument);
  CHECK_THROWS_AS(thinness_integral({3.0, 10.0}, s, 1.0, 0.0, 16.0, 100, 10, 0), std::invalid_argument);
}

TEST_CASE("unit ball volume") {
  CHECK(unit_ball_volume(1) == doctest::Approx(2.0));
  CHECK(unit_ball_volume(2) == doctest::Approx(M_PI));
  CHECK(unit_ball_volume(3) == doctest::Approx(4.0 * M_PI / 3.0));
}
