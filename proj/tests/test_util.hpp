#pragma once

#include <random>

#include "ckmpm/types.hpp"

namespace ckmpm::testing {

inline std::mt19937& rng() {
  static std::mt19937 gen(0x5eed);
  return gen;
}

inline Real uniform(Real lo, Real hi) {
  return std::uniform_real_distribution<Real>(lo, hi)(rng());
}

inline Vec2 random_point(Real lo, Real hi) { return Vec2(uniform(lo, hi), uniform(lo, hi)); }

inline Mat2 random_matrix(Real scale) {
  Mat2 m;
  m << uniform(-scale, scale), uniform(-scale, scale), uniform(-scale, scale),
      uniform(-scale, scale);
  return m;
}

/// Random F in a neighborhood of the identity (det > 0 for moderate scale).
inline Mat2 random_F_near_identity(Real scale) { return Mat2::Identity() + random_matrix(scale); }

inline Mat2 rotation(Real angle) {
  Mat2 r;
  r << std::cos(angle), -std::sin(angle), std::sin(angle), std::cos(angle);
  return r;
}

inline Real rel_err(Real got, Real want) {
  const Real denom = std::max(std::abs(want), Real(1e-300));
  return std::abs(got - want) / denom;
}

}  // namespace ckmpm::testing
