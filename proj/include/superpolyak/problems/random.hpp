#pragma once

// Seed streams. One root seed is expanded into independent per-component
// seeds with a counter-based SplitMix64 mix, so the instance data and the
// solver starting point can be regenerated independently of each other.

#include "superpolyak/core.hpp"

#include <cmath>
#include <cstdint>
#include <random>

namespace superpolyak::problems {

inline constexpr std::uint64_t splitmix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

enum class Stream : std::uint64_t { instance = 1, initializer = 2, auxiliary = 3 };

inline constexpr std::uint64_t derive_seed(std::uint64_t root, Stream stream) {
  return splitmix64(splitmix64(root) ^ splitmix64(static_cast<std::uint64_t>(stream) << 32));
}

using Rng = std::mt19937_64;

inline Rng make_rng(std::uint64_t root, Stream stream) { return Rng(derive_seed(root, stream)); }

inline Vector gaussian_vector(Rng& rng, Index n) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Vector v(n);
  for (Index k = 0; k < n; ++k) v(k) = normal(rng);
  return v;
}

inline Matrix gaussian_matrix(Rng& rng, Index rows, Index cols) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix m(rows, cols);
  // Column-major fill order is part of the reproducibility contract.
  for (Index c = 0; c < cols; ++c)
    for (Index r = 0; r < rows; ++r) m(r, c) = normal(rng);
  return m;
}

inline Vector unit_sphere(Rng& rng, Index n) {
  Vector v = gaussian_vector(rng, n);
  return v / v.norm();
}

/// d x r matrix with orthonormal columns, uniformly distributed.
inline Matrix random_orthonormal(Rng& rng, Index d, Index r) {
  const Matrix g = gaussian_matrix(rng, d, r);
  Eigen::HouseholderQR<Matrix> qr(g);
  Matrix q = qr.householderQ() * Matrix::Identity(d, r);
  const Matrix rr = qr.matrixQR().topLeftCorner(r, r);
  for (Index j = 0; j < r; ++j)
    if (rr(j, j) < 0.0) q.col(j) *= -1.0;
  return q;
}

/// Uniformly random point at relative distance one from `center`:
/// ||center - x|| = ||center||.
inline Vector relative_unit_start(Rng& rng, const Vector& center) {
  return center + center.norm() * unit_sphere(rng, center.size());
}

}  // namespace superpolyak::problems
