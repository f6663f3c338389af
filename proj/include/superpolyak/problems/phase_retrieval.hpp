#pragma once

// Complex phase retrieval as a two-set feasibility problem in C^m:
//
//   Y1 = { u : |u| = y },   Y2 = range(A),   f(u) = dist(u, Y1) + dist(u, Y2).
//
// Points of C^m are handled as interleaved (re, im) pairs in R^{2m}; the real
// inner product on R^{2m} is Re trace(x^H y). On either set the zero vector
// is the selected element of the distance-function subdifferential.

#include "superpolyak/core.hpp"
#include "superpolyak/fallbacks.hpp"
#include "superpolyak/problems/random.hpp"

#include <complex>
#include <cstdint>
#include <memory>

namespace superpolyak::problems {

using CVector = Eigen::VectorXcd;
using CMatrix = Eigen::MatrixXcd;

inline Eigen::Map<const CVector> as_complex(const Vector& x) {
  return {reinterpret_cast<const std::complex<double>*>(x.data()), x.size() / 2};
}

inline Vector as_real(const CVector& z) {
  Vector out(2 * z.size());
  Eigen::Map<CVector>(reinterpret_cast<std::complex<double>*>(out.data()), z.size()) = z;
  return out;
}

/// Componentwise y_k * u_k / |u_k|; entries with |u_k| <= 1e-300 map to
/// (y_k, 0).
inline Vector proj_magnitude(const Vector& u, const Vector& y) {
  if (u.size() != 2 * y.size()) throw ConfigError("proj_magnitude: expected 2 * len(y) reals");
  Vector out(u.size());
  for (Index k = 0; k < y.size(); ++k) {
    const double re = u(2 * k);
    const double im = u(2 * k + 1);
    const double mag = std::hypot(re, im);
    if (mag <= 1e-300) {
      out(2 * k) = y(k);
      out(2 * k + 1) = 0.0;
    } else {
      out(2 * k) = y(k) * re / mag;
      out(2 * k + 1) = y(k) * im / mag;
    }
  }
  return out;
}

struct PhaseRetrievalInstance {
  Index d = 0;
  Index m = 0;
  std::uint64_t seed = 0;
  CMatrix a;         // m x d, i.i.d. standard complex Gaussian
  CVector x_bar;     // planted signal on the complex unit sphere
  Vector magnitudes; // |A x_bar|
  CMatrix basis;     // m x d orthonormal basis of range(A)

  [[nodiscard]] Index dim() const { return 2 * m; }
  [[nodiscard]] Vector planted() const { return as_real(a * x_bar); }

  [[nodiscard]] Vector proj_range(const Vector& u) const {
    const auto z = as_complex(u);
    return as_real(basis * (basis.adjoint() * z));
  }
  [[nodiscard]] Vector proj_modulus(const Vector& u) const { return proj_magnitude(u, magnitudes); }

  /// Signal estimate A^+ u.
  [[nodiscard]] CVector recover_signal(const Vector& u) const {
    return a.colPivHouseholderQr().solve(CVector(as_complex(u)));
  }
};

struct PhaseRetrievalProblem {
  Oracle oracle;
  std::shared_ptr<const PhaseRetrievalInstance> instance;
  AlgorithmicMapping mapping;  // P_{Y2} o P_{Y1}
};

inline PhaseRetrievalProblem gen_phase_retrieval(Index d, Index m, std::uint64_t seed) {
  if (d < 1 || m < d) throw ConfigError("phase retrieval: need d >= 1 and m >= d");
  Rng rng = make_rng(seed, Stream::instance);
  auto inst = std::make_shared<PhaseRetrievalInstance>();
  inst->d = d;
  inst->m = m;
  inst->seed = seed;
  const double scale = 1.0 / std::sqrt(2.0);
  const Matrix re = gaussian_matrix(rng, m, d);
  const Matrix im = gaussian_matrix(rng, m, d);
  inst->a = (re.cast<std::complex<double>>() + std::complex<double>(0.0, 1.0) * im.cast<std::complex<double>>()) * scale;
  const Vector xr = gaussian_vector(rng, d);
  const Vector xi = gaussian_vector(rng, d);
  CVector x(d);
  for (Index k = 0; k < d; ++k) x(k) = {xr(k), xi(k)};
  inst->x_bar = x / x.norm();
  inst->magnitudes = (inst->a * inst->x_bar).cwiseAbs();
  Eigen::HouseholderQR<CMatrix> qr(inst->a);
  inst->basis = qr.householderQ() * CMatrix::Identity(m, d);

  std::shared_ptr<const PhaseRetrievalInstance> shared = inst;
  Oracle oracle;
  oracle.dim = shared->dim();
  oracle.eval_f = [shared](const Vector& u) {
    return (u - shared->proj_modulus(u)).norm() + (u - shared->proj_range(u)).norm();
  };
  oracle.eval_g = [shared](const Vector& u) {
    Vector g = Vector::Zero(u.size());
    const Vector r1 = u - shared->proj_modulus(u);
    const Vector r2 = u - shared->proj_range(u);
    const double d1 = r1.norm();
    const double d2 = r2.norm();
    if (d1 > 0.0) g += r1 / d1;
    if (d2 > 0.0) g += r2 / d2;
    return g;
  };
  auto mapping = alternating_projection_map([shared](const Vector& u) { return shared->proj_modulus(u); },
                                            [shared](const Vector& u) { return shared->proj_range(u); });
  return {std::move(oracle), std::move(shared), std::move(mapping)};
}

}  // namespace superpolyak::problems
