#pragma once

#include <cmath>
#include <cstdint>
#include <random>

#include "srl/htype.hpp"

namespace srl {

using Rng = std::mt19937_64;

// Counter-derived substream: the same (seed, stream) pair always yields the
// same generator, independent of how work is split between threads.
inline Rng make_stream(std::uint64_t seed, std::uint64_t stream) {
  auto mix = [](std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  };
  return Rng(mix(seed ^ mix(stream + 0x632be59bd9b4e019ULL)));
}

inline double uniform(Rng& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

template <class Vector>
Vector unit_vector(Rng& rng, int dim) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Vector v(dim);
  double norm = 0.0;
  do {
    for (int i = 0; i < dim; ++i) v(i) = normal(rng);
    norm = v.norm();
  } while (norm < 1e-12);
  return v / norm;
}

// Uniform point of the box [-hx, hx]^{2n} x [-ht, ht]^m around `center`
// (coordinates, not the group action).
inline GroupPoint box_point(Rng& rng, const GroupPoint& center, double hx, double ht) {
  GroupPoint p = center;
  for (int i = 0; i < p.x.size(); ++i) p.x(i) += uniform(rng, -hx, hx);
  for (int k = 0; k < p.t.size(); ++k) p.t(k) += uniform(rng, -ht, ht);
  return p;
}

}  // namespace srl
