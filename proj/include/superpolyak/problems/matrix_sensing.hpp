#pragma once

// Low-rank matrix sensing with an l1 loss over factored variables,
//
//   f(U, V) = (1/m) sum_i | <l_i, U V^T r_i> - y_i |,
//
// optimized over x = [vec(U); vec(V)] in R^{2dr} (column-major). The
// subgradient is the formal chain rule with sign(0) = 0.

#include "superpolyak/core.hpp"
#include "superpolyak/problems/hadamard.hpp"
#include "superpolyak/problems/random.hpp"

#include <cmath>
#include <cstdint>
#include <memory>
#include <string_view>
#include <utility>

namespace superpolyak::problems {

enum class Ensemble { gaussian, hadamard };

inline std::string_view to_string(Ensemble e) { return e == Ensemble::gaussian ? "gaussian" : "hadamard"; }

inline double sign0(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

/// One side of the measurement map: rows l_1, ..., l_m in R^d.
///
/// The Hadamard ensemble stacks m/d blocks H * diag(s_b) with H the +-1
/// Hadamard matrix and s_b independent random signs, so each block is applied
/// with one fast transform per column.
class SensingOperator {
 public:
  static SensingOperator gaussian(Rng& rng, Index m, Index d) {
    SensingOperator op(Ensemble::gaussian, m, d);
    op.dense_ = gaussian_matrix(rng, m, d);
    return op;
  }

  static SensingOperator hadamard(Rng& rng, Index m, Index d) {
    if (!is_power_of_two(d)) throw ConfigError("hadamard ensemble needs d to be a power of two");
    if (m % d != 0) throw ConfigError("hadamard ensemble needs m to be a multiple of d");
    SensingOperator op(Ensemble::hadamard, m, d);
    std::bernoulli_distribution coin(0.5);
    op.signs_.resize(d, m / d);
    for (Index b = 0; b < op.signs_.cols(); ++b)
      for (Index k = 0; k < d; ++k) op.signs_(k, b) = coin(rng) ? 1.0 : -1.0;
    return op;
  }

  [[nodiscard]] Ensemble ensemble() const { return ensemble_; }
  [[nodiscard]] Index rows() const { return m_; }
  [[nodiscard]] Index cols() const { return d_; }

  /// (m x r) = L X for X of shape d x r.
  [[nodiscard]] Matrix apply(const Matrix& x) const {
    if (ensemble_ == Ensemble::gaussian) return dense_ * x;
    Matrix out(m_, x.cols());
    Vector buf(d_);
    for (Index b = 0; b < signs_.cols(); ++b) {
      for (Index c = 0; c < x.cols(); ++c) {
        buf = signs_.col(b).cwiseProduct(x.col(c));
        fwht_inplace({buf.data(), static_cast<std::size_t>(d_)});
        out.block(b * d_, c, d_, 1) = buf;
      }
    }
    return out;
  }

  /// (d x r) = L^T Z for Z of shape m x r.
  [[nodiscard]] Matrix apply_transpose(const Matrix& z) const {
    if (ensemble_ == Ensemble::gaussian) return dense_.transpose() * z;
    Matrix out = Matrix::Zero(d_, z.cols());
    Vector buf(d_);
    for (Index b = 0; b < signs_.cols(); ++b) {
      for (Index c = 0; c < z.cols(); ++c) {
        buf = z.block(b * d_, c, d_, 1);
        fwht_inplace({buf.data(), static_cast<std::size_t>(d_)});
        out.col(c) += signs_.col(b).cwiseProduct(buf);
      }
    }
    return out;
  }

  /// Materialized m x d matrix.
  [[nodiscard]] Matrix dense() const {
    if (ensemble_ == Ensemble::gaussian) return dense_;
    return apply(Matrix::Identity(d_, d_));
  }

 private:
  SensingOperator(Ensemble e, Index m, Index d) : ensemble_(e), m_(m), d_(d) {}

  Ensemble ensemble_;
  Index m_;
  Index d_;
  Matrix dense_;
  Matrix signs_;  // d x (m / d), Hadamard only
};

struct MatrixSensingInstance {
  Index d = 0;
  Index r = 0;
  Index m = 0;
  double kappa_tilde = 1.0;
  Ensemble ensemble = Ensemble::gaussian;
  std::uint64_t seed = 0;
  SensingOperator left;
  SensingOperator right;
  Vector targets;
  Matrix u_bar;  // d x r
  Matrix v_bar;  // d x r
  Vector spectrum;  // singular values of M = U V^T, descending

  [[nodiscard]] Index dim() const { return 2 * d * r; }

  [[nodiscard]] Vector stack(const Matrix& u, const Matrix& v) const {
    Vector x(dim());
    x.head(d * r) = u.reshaped();
    x.tail(d * r) = v.reshaped();
    return x;
  }

  [[nodiscard]] Vector planted() const { return stack(u_bar, v_bar); }

  /// Residuals <l_i, U V^T r_i> - y_i together with L U and R V.
  struct Eval {
    Matrix lu;
    Matrix rv;
    Vector residual;
  };

  [[nodiscard]] Eval evaluate(const Vector& x) const {
    const Eigen::Map<const Matrix> u(x.data(), d, r);
    const Eigen::Map<const Matrix> v(x.data() + d * r, d, r);
    Eval e{left.apply(u), right.apply(v), {}};
    e.residual = e.lu.cwiseProduct(e.rv).rowwise().sum() - targets;
    return e;
  }
};

struct MatrixSensingProblem {
  Oracle oracle;
  std::shared_ptr<const MatrixSensingInstance> instance;
};

inline MatrixSensingProblem gen_matrix_sensing(Index d, Index r, Index m, double kappa_tilde,
                                               Ensemble ensemble, std::uint64_t seed) {
  if (d < 1 || r < 1 || m < 1) throw ConfigError("matrix sensing: d, r, m must be positive");
  if (r > d) throw ConfigError("matrix sensing: rank r must not exceed d");
  if (!(kappa_tilde >= 1.0)) throw ConfigError("matrix sensing: kappa must be at least 1");

  Rng rng = make_rng(seed, Stream::instance);
  Matrix u_orth = random_orthonormal(rng, d, r);
  Matrix v_orth = random_orthonormal(rng, d, r);
  Vector spectrum(r);
  for (Index j = 0; j < r; ++j) {
    spectrum(j) = r == 1 ? 1.0 : std::pow(kappa_tilde, -static_cast<double>(j) / static_cast<double>(r - 1));
  }
  const Vector root = spectrum.cwiseSqrt();
  SensingOperator left = ensemble == Ensemble::gaussian ? SensingOperator::gaussian(rng, m, d)
                                                        : SensingOperator::hadamard(rng, m, d);
  SensingOperator right = ensemble == Ensemble::gaussian ? SensingOperator::gaussian(rng, m, d)
                                                         : SensingOperator::hadamard(rng, m, d);

  auto inst = std::make_shared<MatrixSensingInstance>(MatrixSensingInstance{
      d, r, m, kappa_tilde, ensemble, seed, std::move(left), std::move(right), Vector{},
      u_orth * root.asDiagonal(), v_orth * root.asDiagonal(), spectrum});
  inst->targets = inst->left.apply(inst->u_bar).cwiseProduct(inst->right.apply(inst->v_bar)).rowwise().sum();

  std::shared_ptr<const MatrixSensingInstance> shared = inst;
  Oracle oracle;
  oracle.dim = shared->dim();
  oracle.f_star = 0.0;
  oracle.eval_f = [shared](const Vector& x) {
    return shared->evaluate(x).residual.lpNorm<1>() / static_cast<double>(shared->m);
  };
  oracle.eval_g = [shared](const Vector& x) {
    const auto& in = *shared;
    const auto e = in.evaluate(x);
    const Vector s = e.residual.unaryExpr([](double v) { return sign0(v); }) / static_cast<double>(in.m);
    const Matrix gu = in.left.apply_transpose(s.asDiagonal() * e.rv);
    const Matrix gv = in.right.apply_transpose(s.asDiagonal() * e.lu);
    return in.stack(gu, gv);
  };
  return {std::move(oracle), std::move(shared)};
}

}  // namespace superpolyak::problems
