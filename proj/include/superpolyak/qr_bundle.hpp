#pragma once

// Incrementally maintained reduced QR factorization of the transposed bundle
// matrix A^T = [v_0 ... v_{i-1}], used to apply the pseudoinverse A^+ in
// O(d*i) per bundle step.
//
// The orthogonal factor is never formed. It is kept as a product of
// Householder reflectors in compact WY form, Q_full = I - U T U^T, with U
// d x i (unit vectors padded with leading zeros) and T i x i upper
// triangular. The thin factor is the first i columns of Q_full.

#include "superpolyak/core.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <cmath>

namespace superpolyak {

inline constexpr double kRankRelTol = 1e-10;

enum class AppendResult { Updated, RankDeficient };

class IncrementalQr {
 public:
  /// Starts the factorization from A_1^T = v0. Throws ZeroGradientError when
  /// v0 is numerically zero.
  static IncrementalQr init(const Vector& v0, Index capacity = -1) {
    IncrementalQr qr(v0.size(), capacity < 1 ? v0.size() : std::min(capacity, v0.size()));
    if (qr.reflect_and_store(v0, v0) != AppendResult::Updated) {
      throw ZeroGradientError("initial bundle row is numerically zero");
    }
    return qr;
  }

  /// Appends one row v to A (one column to A^T). On RankDeficient the state
  /// is left untouched.
  AppendResult append(const Vector& v) {
    if (v.size() != dim_) throw ConfigError("qr_append: row has wrong dimension");
    if (rank_ >= dim_) return AppendResult::RankDeficient;
    // w = Q_full^T v = v - U T^T U^T v
    const auto u = u_.leftCols(rank_);
    const Vector utv = u.transpose() * v;
    const Vector t_utv = t_.topLeftCorner(rank_, rank_).triangularView<Eigen::Upper>().transpose() * utv;
    const Vector w = v - u * t_utv;
    return reflect_and_store(w, v);
  }

  /// Minimum-norm solution of A x = w, i.e. Q R^{-T} w.
  [[nodiscard]] Vector apply_pinv(const Vector& w) const {
    if (w.size() != rank_) throw ConfigError("apply_pinv: rhs length must equal row count");
    const Vector z =
        r_.topLeftCorner(rank_, rank_).triangularView<Eigen::Upper>().transpose().solve(w);
    return apply_thin_q_unsigned(z);
  }

  [[nodiscard]] Index dim() const { return dim_; }
  [[nodiscard]] Index rows_count() const { return rank_; }

  /// Relative rank tolerance scaled by the largest R diagonal seen so far.
  [[nodiscard]] double tol_rank() const { return kRankRelTol * std::max(1.0, max_diag_); }

  /// A_i^T (d x i), the raw appended rows as columns.
  [[nodiscard]] Matrix rows() const { return rows_.leftCols(rank_); }

  /// Thin orthonormal factor (d x i) with the sign convention diag(R) >= 0.
  [[nodiscard]] Matrix q() const {
    Matrix out(dim_, rank_);
    for (Index j = 0; j < rank_; ++j) {
      Vector e = Vector::Zero(rank_);
      e(j) = sign_(j);
      out.col(j) = apply_thin_q_unsigned(e);
    }
    return out;
  }

  /// Upper triangular factor (i x i) with nonnegative diagonal.
  [[nodiscard]] Matrix r() const {
    Matrix out = r_.topLeftCorner(rank_, rank_).triangularView<Eigen::Upper>();
    for (Index j = 0; j < rank_; ++j) out.row(j) *= sign_(j);
    return out;
  }

  [[nodiscard]] Matrix wy_u() const { return u_.leftCols(rank_); }
  [[nodiscard]] Matrix wy_t() const {
    return t_.topLeftCorner(rank_, rank_).triangularView<Eigen::Upper>();
  }

 private:
  IncrementalQr(Index dim, Index capacity)
      : dim_(dim),
        u_(Matrix::Zero(dim, capacity)),
        t_(Matrix::Zero(capacity, capacity)),
        r_(Matrix::Zero(capacity, capacity)),
        rows_(dim, capacity),
        sign_(capacity) {}

  void grow() {
    const Index cap = std::min(dim_, std::max<Index>(1, 2 * u_.cols()));
    u_.conservativeResize(Eigen::NoChange, cap);
    rows_.conservativeResize(Eigen::NoChange, cap);
    sign_.conservativeResize(cap);
    Matrix t = Matrix::Zero(cap, cap);
    Matrix r = Matrix::Zero(cap, cap);
    t.topLeftCorner(rank_, rank_) = t_.topLeftCorner(rank_, rank_);
    r.topLeftCorner(rank_, rank_) = r_.topLeftCorner(rank_, rank_);
    t_ = std::move(t);
    r_ = std::move(r);
  }

  // w is Q_full^T v; its tail below row `rank_` is annihilated by a new
  // Householder reflector.
  AppendResult reflect_and_store(const Vector& w, const Vector& v) {
    const Index i = rank_;
    const Index n = dim_ - i;
    const auto tail = w.tail(n);
    const double tail_norm = tail.norm();
    if (tail_norm <= tol_rank() * std::max(1.0, v.norm())) return AppendResult::RankDeficient;
    if (i == u_.cols()) grow();

    const double alpha = tail(0) >= 0.0 ? -tail_norm : tail_norm;
    Vector u = Vector::Zero(dim_);
    u.tail(n) = tail;
    u(i) -= alpha;
    const double beta = 2.0 / u.squaredNorm();

    // Q_new = (I - U T U^T)(I - beta u u^T) = I - [U u] [[T, -beta T U^T u], [0, beta]] [U u]^T
    if (i > 0) {
      const Vector utu = u_.leftCols(i).transpose() * u;
      const Vector tutu = t_.topLeftCorner(i, i).triangularView<Eigen::Upper>() * utu;
      t_.col(i).head(i) = -beta * tutu;
    }
    t_(i, i) = beta;
    u_.col(i) = u;
    r_.col(i).head(i) = w.head(i);
    r_(i, i) = alpha;
    sign_(i) = alpha >= 0.0 ? 1.0 : -1.0;
    rows_.col(i) = v;
    max_diag_ = std::max(max_diag_, std::abs(alpha));
    ++rank_;
    return AppendResult::Updated;
  }

  // Q_full[:, :i] z = [z; 0] - U T U^T [z; 0]
  [[nodiscard]] Vector apply_thin_q_unsigned(const Vector& z) const {
    const Index i = rank_;
    const Vector utz = u_.topLeftCorner(i, i).transpose() * z;
    const Vector tutz = t_.topLeftCorner(i, i).triangularView<Eigen::Upper>() * utz;
    Vector out = -(u_.leftCols(i) * tutz);
    out.head(i) += z;
    return out;
  }

  Index dim_;
  Index rank_ = 0;
  double max_diag_ = 0.0;
  Matrix u_;
  Matrix t_;
  Matrix r_;  // raw Householder R; row j carries sign_(j)
  Matrix rows_;
  Vector sign_;
};

inline IncrementalQr qr_init(const Vector& v0) { return IncrementalQr::init(v0); }

inline AppendResult qr_append(IncrementalQr& state, const Vector& v) { return state.append(v); }

inline Vector apply_pinv(const IncrementalQr& state, const Vector& w) {
  return state.apply_pinv(w);
}

/// Minimum-norm least-squares solution of A x = w via a dense SVD, with
/// singular values below 1e-10 * max(1, sigma_max) truncated. Used as the
/// reference for the incremental factorization and as the rank-deficient
/// escape path of the bundle loop.
inline Vector pinv_dense_oracle(const Matrix& a, const Vector& w) {
  if (a.rows() != w.size()) throw ConfigError("pinv_dense_oracle: shape mismatch");
  if (a.size() == 0) return Vector::Zero(a.cols());
  Eigen::BDCSVD<Matrix> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Vector& sv = svd.singularValues();
  const double tol = kRankRelTol * std::max(1.0, sv.size() > 0 ? sv(0) : 0.0);
  Vector coeff = svd.matrixU().transpose() * w;
  for (Index k = 0; k < sv.size(); ++k) coeff(k) = sv(k) > tol ? coeff(k) / sv(k) : 0.0;
  return svd.matrixV() * coeff;
}

}  // namespace superpolyak
