#pragma once

// Max-linear regression: recover beta_1..beta_r from y_i = max_j <beta_j, a_i>
// by minimizing f(beta) = (1/m) sum_i | y_i - max_j <beta_j, a_i> | over
// beta = [beta_1; ...; beta_r] in R^{dr}.
//
// Subgradient selection: for each sample the lowest-index maximizing piece
// receives sign(max_j <beta_j, a_i> - y_i) a_i / m, with sign(0) = 0.

#include "superpolyak/core.hpp"
#include "superpolyak/problems/matrix_sensing.hpp"
#include "superpolyak/problems/random.hpp"

#include <cstdint>
#include <memory>

namespace superpolyak::problems {

struct MaxLinearInstance {
  Index d = 0;
  Index r = 0;
  Index m = 0;
  std::uint64_t seed = 0;
  Matrix a;       // m x d, rows a_i
  Matrix betas;   // d x r, planted beta_j on the unit sphere
  Vector targets;

  [[nodiscard]] Index dim() const { return d * r; }
  [[nodiscard]] Vector planted() const { return betas.reshaped(); }

  /// Per-sample maximum and the lowest index attaining it.
  void pieces(const Vector& x, Vector& value, Eigen::VectorXi& arg) const {
    const Eigen::Map<const Matrix> b(x.data(), d, r);
    const Matrix z = a * b;
    value.resize(m);
    arg.resize(m);
    for (Index i = 0; i < m; ++i) {
      Index best = 0;
      for (Index j = 1; j < r; ++j)
        if (z(i, j) > z(i, best)) best = j;
      arg(i) = static_cast<int>(best);
      value(i) = z(i, best);
    }
  }
};

struct MaxLinearProblem {
  Oracle oracle;
  std::shared_ptr<const MaxLinearInstance> instance;
};

inline MaxLinearProblem gen_max_linear(Index d, Index r, Index m, std::uint64_t seed) {
  if (d < 1 || r < 1 || m < 1) throw ConfigError("max-linear: d, r, m must be positive");
  Rng rng = make_rng(seed, Stream::instance);
  auto inst = std::make_shared<MaxLinearInstance>();
  inst->d = d;
  inst->r = r;
  inst->m = m;
  inst->seed = seed;
  inst->a = gaussian_matrix(rng, m, d);
  inst->betas.resize(d, r);
  for (Index j = 0; j < r; ++j) inst->betas.col(j) = unit_sphere(rng, d);
  Eigen::VectorXi arg;
  inst->pieces(inst->planted(), inst->targets, arg);

  std::shared_ptr<const MaxLinearInstance> shared = inst;
  Oracle oracle;
  oracle.dim = shared->dim();
  oracle.eval_f = [shared](const Vector& x) {
    Vector value;
    Eigen::VectorXi arg;
    shared->pieces(x, value, arg);
    return (shared->targets - value).lpNorm<1>() / static_cast<double>(shared->m);
  };
  oracle.eval_g = [shared](const Vector& x) {
    const auto& in = *shared;
    Vector value;
    Eigen::VectorXi arg;
    in.pieces(x, value, arg);
    Matrix w = Matrix::Zero(in.m, in.r);
    for (Index i = 0; i < in.m; ++i) w(i, arg(i)) = sign0(value(i) - in.targets(i)) / static_cast<double>(in.m);
    const Matrix g = in.a.transpose() * w;
    return Vector(g.reshaped());
  };
  return {std::move(oracle), std::move(shared)};
}

}  // namespace superpolyak::problems
