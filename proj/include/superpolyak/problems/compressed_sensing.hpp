#pragma once

// Sparse recovery through the fixed points of the proximal-gradient map
//
//   T(x) = soft_threshold(x - step * A^T (A x - y), theta),
//
// with theta = step * lambda (fixed points minimize 0.5 ||Ax - y||^2 + lambda ||x||_1)
// or, with `literal_prox`, theta = lambda. The objective is the residual norm
// f(x) = ||x - T(x)||, whose subgradient is (I - J)^T F / ||F|| for
// F = x - T(x) and J = D (I - step A^T A), D the indicator of coordinates
// strictly above the threshold.

#include "superpolyak/core.hpp"
#include "superpolyak/fallbacks.hpp"
#include "superpolyak/problems/random.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <memory>
#include <numeric>
#include <stdexcept>
#include <vector>

namespace superpolyak::problems {

inline Vector soft_threshold(const Vector& x, double t) {
  if (!(t >= 0.0)) throw ConfigError("soft_threshold: threshold must be nonnegative");
  return x.unaryExpr([t](double v) {
    const double mag = std::abs(v) - t;
    return mag > 0.0 ? std::copysign(mag, v) : 0.0;
  });
}

struct CompressedSensingInstance {
  Index d = 0;
  Index m = 0;
  Index s = 0;
  double lambda = 0.0;
  bool literal_prox = false;
  std::uint64_t seed = 0;
  Matrix a;        // m x d, N(0, 1/m) entries
  Vector x_bar;    // s-sparse signal
  Vector y;        // A x_bar
  double step = 0.0;       // 0.95 / sigma_max(A)^2
  double threshold = 0.0;  // step * lambda, or lambda when literal_prox
  Vector fixed_point;      // x* = T(x*)

  [[nodiscard]] Vector forward(const Vector& x) const { return x - step * (a.transpose() * (a * x - y)); }
  [[nodiscard]] Vector prox_grad(const Vector& x) const { return soft_threshold(forward(x), threshold); }
  [[nodiscard]] Vector planted() const { return fixed_point; }
  /// Penalty of the lasso problem whose minimizers are the fixed points of T.
  [[nodiscard]] double effective_lambda() const { return threshold / step; }
};

namespace detail {

// Accelerated prox-gradient iterations followed by an exact solve on the
// identified support, then plain T iterations as polish.
inline Vector solve_fixed_point(const CompressedSensingInstance& in) {
  const double lam = in.effective_lambda();
  Vector x = Vector::Zero(in.d);
  Vector z = x;
  double t = 1.0;
  for (int it = 0; it < 50000; ++it) {
    const Vector next = in.prox_grad(z);
    const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
    z = next + ((t - 1.0) / t_next) * (next - x);
    const double moved = (next - x).norm();
    x = next;
    t = t_next;
    if (moved <= 1e-13) break;
  }

  std::vector<Index> support;
  for (Index k = 0; k < in.d; ++k)
    if (x(k) != 0.0) support.push_back(k);
  if (!support.empty()) {
    const Index k = static_cast<Index>(support.size());
    Matrix as(in.m, k);
    Vector sg(k);
    for (Index j = 0; j < k; ++j) {
      as.col(j) = in.a.col(support[j]);
      sg(j) = x(support[j]) > 0.0 ? 1.0 : -1.0;
    }
    const Vector zs = (as.transpose() * as).ldlt().solve(as.transpose() * in.y - lam * sg);
    Vector cand = Vector::Zero(in.d);
    for (Index j = 0; j < k; ++j) cand(support[j]) = zs(j);
    if ((cand - in.prox_grad(cand)).norm() < (x - in.prox_grad(x)).norm()) x = cand;
  }

  for (int it = 0; it < 100000; ++it) {
    const Vector next = in.prox_grad(x);
    if ((x - next).norm() <= 1e-14) break;
    x = next;
  }
  return x;
}

}  // namespace detail

struct CompressedSensingProblem {
  Oracle oracle;
  std::shared_ptr<const CompressedSensingInstance> instance;
  AlgorithmicMapping mapping;  // fixed-point map T
};

/// Oracle and fixed-point mapping for a prepared instance.
inline CompressedSensingProblem make_compressed_sensing_problem(
    std::shared_ptr<const CompressedSensingInstance> shared) {
  Oracle oracle;
  oracle.dim = shared->d;
  oracle.eval_f = [shared](const Vector& x) { return (x - shared->prox_grad(x)).norm(); };
  oracle.eval_g = [shared](const Vector& x) {
    const auto& in = *shared;
    const Vector fwd = in.forward(x);
    const Vector f = x - soft_threshold(fwd, in.threshold);
    const double nf = f.norm();
    if (nf == 0.0) return Vector(Vector::Zero(in.d));
    Vector df(in.d);
    for (Index k = 0; k < in.d; ++k) df(k) = std::abs(fwd(k)) > in.threshold ? f(k) : 0.0;
    const Vector w = df - in.step * (in.a.transpose() * (in.a * df));
    return Vector((f - w) / nf);
  };
  auto mapping = fixed_point_map([shared](const Vector& x) { return shared->prox_grad(x); });
  mapping.name = "prox_gradient";
  return {std::move(oracle), std::move(shared), std::move(mapping)};
}

inline CompressedSensingProblem gen_compressed_sensing(Index d, Index m, Index s, double lambda,
                                                       std::uint64_t seed, bool literal_prox = false) {
  if (d < 1 || m < 1 || s < 1) throw ConfigError("compressed sensing: d, m, s must be positive");
  if (s > m || m > d) throw ConfigError("compressed sensing: need s <= m <= d");
  if (!(lambda > 0.0)) throw ConfigError("compressed sensing: lambda must be positive");

  Rng rng = make_rng(seed, Stream::instance);
  auto inst = std::make_shared<CompressedSensingInstance>();
  inst->d = d;
  inst->m = m;
  inst->s = s;
  inst->lambda = lambda;
  inst->literal_prox = literal_prox;
  inst->seed = seed;
  inst->a = gaussian_matrix(rng, m, d) / std::sqrt(static_cast<double>(m));

  std::vector<Index> perm(static_cast<std::size_t>(d));
  std::iota(perm.begin(), perm.end(), Index{0});
  for (Index k = 0; k < s; ++k) {
    std::uniform_int_distribution<Index> pick(k, d - 1);
    std::swap(perm[k], perm[pick(rng)]);
  }
  inst->x_bar = Vector::Zero(d);
  const Vector values = gaussian_vector(rng, s);
  for (Index k = 0; k < s; ++k) inst->x_bar(perm[k]) = values(k);
  inst->y = inst->a * inst->x_bar;

  const double smax = Eigen::JacobiSVD<Matrix>(inst->a).singularValues()(0);
  inst->step = 0.95 / (smax * smax);
  inst->threshold = literal_prox ? lambda : inst->step * lambda;
  inst->fixed_point = detail::solve_fixed_point(*inst);
  if ((inst->fixed_point - inst->prox_grad(inst->fixed_point)).norm() > 1e-12) {
    throw std::runtime_error("compressed sensing: fixed point did not converge");
  }

  return make_compressed_sensing_problem(std::move(inst));
}

}  // namespace superpolyak::problems
