#pragma once

// In-place fast Walsh-Hadamard transform (unnormalized, entries +-1).

#include "superpolyak/core.hpp"

#include <bit>
#include <cstdint>
#include <span>

namespace superpolyak::problems {

inline bool is_power_of_two(Index n) { return n > 0 && std::has_single_bit(static_cast<std::uint64_t>(n)); }

/// `x.size()` must be a power of two.
inline void fwht_inplace(std::span<double> x) {
  const std::size_t n = x.size();
  for (std::size_t h = 1; h < n; h *= 2) {
    for (std::size_t i = 0; i < n; i += 2 * h) {
      for (std::size_t j = i; j < i + h; ++j) {
        const double a = x[j];
        const double b = x[j + h];
        x[j] = a + b;
        x[j + h] = a - b;
      }
    }
  }
}

/// Dense Hadamard matrix of order n (Sylvester construction). Test use.
inline Matrix hadamard_matrix(Index n) {
  Matrix h(1, 1);
  h(0, 0) = 1.0;
  while (h.rows() < n) {
    const Index k = h.rows();
    Matrix next(2 * k, 2 * k);
    next << h, h, h, -h;
    h = std::move(next);
  }
  return h;
}

}  // namespace superpolyak::problems
