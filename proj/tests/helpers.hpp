#pragma once

#include <cmath>
#include <random>

#include "nplab/kernelspace.hpp"

namespace testing {

using nplab::Complex;
using nplab::Point;
using nplab::kernelspace::PolyFn;
using nplab::kernelspace::SpacePtr;

inline double uniform(std::mt19937_64& rng, double lo = 0.0, double hi = 1.0) {
  return lo + (hi - lo) * static_cast<double>(rng() >> 11) / 9007199254740992.0;
}

inline Point gaussian_point(std::mt19937_64& rng, int d) {
  std::normal_distribution<double> n(0.0, 1.0);
  Point z(d);
  for (int i = 0; i < d; ++i) z[i] = Complex(n(rng), n(rng));
  return z;
}

/// Uniform on the unit sphere of C^d.
inline Point sphere_point(std::mt19937_64& rng, int d) {
  const Point z = gaussian_point(rng, d);
  return z / z.norm();
}

/// |lambda| uniform in [0, rmax), direction uniform.
inline Point ball_point(std::mt19937_64& rng, int d, double rmax) { return uniform(rng, 0.0, rmax) * sphere_point(rng, d); }

/// Random complex coefficients on the monomials of degree <= deg.
inline PolyFn random_poly(std::mt19937_64& rng, const SpacePtr& space, int deg, int fiber = -1) {
  PolyFn p(space);
  const std::size_t end = space->degree_begin(deg + 1);
  for (std::size_t m = 0; m < end; ++m) {
    for (int r = 0; r < space->fiber_dim(); ++r) {
      if (fiber >= 0 && r != fiber) continue;
      p.set_coeff(m, r, Complex(uniform(rng, -1, 1), uniform(rng, -1, 1)));
    }
  }
  return p;
}

/// Random homogeneous polynomial of degree n.
inline PolyFn random_homogeneous(std::mt19937_64& rng, const SpacePtr& space, int n) {
  PolyFn p(space);
  for (std::size_t m = space->degree_begin(n); m < space->degree_begin(n + 1); ++m) {
    p.set_coeff(m, 0, Complex(uniform(rng, -1, 1), uniform(rng, -1, 1)));
  }
  return p;
}

}  // namespace testing
