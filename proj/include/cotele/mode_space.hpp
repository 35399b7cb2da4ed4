#pragma once

// One-particle space C^M: mode vectors, mode operators and the splitting
// data (K1, K2, T, {g_k}) that every teleportation model is built on.

#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "cotele/dense.hpp"
#include "cotele/types.hpp"

namespace cotele {

class ModeVector {
 public:
  ModeVector() = default;

  explicit ModeVector(CVector entries) : entries_(std::move(entries)) {
    if (entries_.size() < 1) throw InvalidDimension("mode vector must have dimension >= 1");
    if (!dense::all_finite(entries_)) throw InvariantViolation("mode vector has non-finite entries");
  }

  static ModeVector zero(Index dim) { return ModeVector(CVector::Zero(dim)); }

  static ModeVector unit(Index dim, Index k) {
    CVector v = CVector::Zero(dim);
    v[k] = 1.0;
    return ModeVector(std::move(v));
  }

  Index dim() const { return entries_.size(); }
  const CVector& entries() const { return entries_; }
  Complex operator[](Index i) const { return entries_[i]; }

  double norm_squared() const { return entries_.squaredNorm(); }
  bool is_zero(double tol = kDedupTol) const {
    return entries_.size() == 0 || entries_.cwiseAbs().maxCoeff() <= tol;
  }

  bool approx_equal(const ModeVector& other, double tol = kDedupTol) const {
    if (dim() != other.dim()) return false;
    return (entries_ - other.entries_).cwiseAbs().maxCoeff() <= tol;
  }

  friend ModeVector operator+(const ModeVector& a, const ModeVector& b) {
    check_dims(a, b);
    return ModeVector(a.entries_ + b.entries_);
  }
  friend ModeVector operator-(const ModeVector& a, const ModeVector& b) {
    check_dims(a, b);
    return ModeVector(a.entries_ - b.entries_);
  }
  friend ModeVector operator-(const ModeVector& a) { return ModeVector(-a.entries_); }
  friend ModeVector operator*(Complex s, const ModeVector& a) { return ModeVector(s * a.entries_); }
  friend ModeVector operator*(double s, const ModeVector& a) { return ModeVector(s * a.entries_); }

  static void check_dims(const ModeVector& a, const ModeVector& b) {
    if (a.dim() != b.dim()) throw DimensionMismatch("mode vector dimensions differ");
  }

 private:
  CVector entries_;
};

/// <f, g>, conjugate-linear in the first argument.
inline Complex inner(const ModeVector& f, const ModeVector& g) {
  ModeVector::check_dims(f, g);
  return f.entries().dot(g.entries());
}

class ModeOperator {
 public:
  ModeOperator() = default;

  explicit ModeOperator(CMatrix entries) : entries_(std::move(entries)) {
    if (entries_.rows() != entries_.cols() || entries_.rows() < 1)
      throw InvalidDimension("mode operator must be a non-empty square matrix");
    if (!dense::all_finite(entries_)) throw InvariantViolation("mode operator has non-finite entries");
  }

  static ModeOperator identity(Index dim) { return ModeOperator(CMatrix::Identity(dim, dim)); }

  Index dim() const { return entries_.rows(); }
  const CMatrix& entries() const { return entries_; }

  ModeVector operator()(const ModeVector& v) const {
    if (v.dim() != dim()) throw DimensionMismatch("operator/vector dimensions differ");
    return ModeVector(entries_ * v.entries());
  }

  ModeOperator adjoint() const { return ModeOperator(entries_.adjoint()); }

  friend ModeOperator operator*(const ModeOperator& a, const ModeOperator& b) {
    if (a.dim() != b.dim()) throw DimensionMismatch("operator dimensions differ");
    return ModeOperator(a.entries_ * b.entries_);
  }

  double norm() const { return dense::operator_norm(entries_); }
  bool is_unitary(double tol = kStructureTol) const { return dense::is_unitary(entries_, tol); }
  bool is_contraction(double tol = kIdentityTol) const { return norm() <= 1.0 + tol; }

 private:
  CMatrix entries_;
};

/// O_f for a constant f: multiplication by a scalar on C^M.
inline ModeOperator scaled_multiplication(Complex scalar, Index dim) {
  return ModeOperator(scalar * CMatrix::Identity(dim, dim));
}

enum class SplittingKind { half, orthogonal, custom };

inline std::string to_string(SplittingKind kind) {
  switch (kind) {
    case SplittingKind::half: return "half";
    case SplittingKind::orthogonal: return "orthogonal";
    case SplittingKind::custom: return "custom";
  }
  return "custom";
}

inline SplittingKind splitting_from_string(const std::string& s) {
  if (s == "half") return SplittingKind::half;
  if (s == "orthogonal") return SplittingKind::orthogonal;
  throw ConfigError("unknown splitting kind '" + s + "'");
}

struct SplittingPair {
  SplittingKind kind = SplittingKind::half;
  ModeOperator k1;
  ModeOperator k2;
  ModeOperator t;
  std::vector<ModeVector> basis;

  Index mode_dim() const { return k1.dim(); }
  int size() const { return static_cast<int>(basis.size()); }

  /// Largest violation over K1*K1 + K2*K2 = 1, unitarity of T,
  /// T K1 g_k = K2 g_k, <K1 g_k, K1 g_j> = delta_kj / 2 and orthonormality of {g_k}.
  double structure_residual() const {
    const Index m = mode_dim();
    const CMatrix id = CMatrix::Identity(m, m);
    const CMatrix& a = k1.entries();
    const CMatrix& b = k2.entries();
    double r = (a.adjoint() * a + b.adjoint() * b - id).cwiseAbs().maxCoeff();
    const CMatrix& u = t.entries();
    r = std::max(r, (u.adjoint() * u - id).cwiseAbs().maxCoeff());
    r = std::max(r, (u * u.adjoint() - id).cwiseAbs().maxCoeff());
    for (std::size_t k = 0; k < basis.size(); ++k) {
      const ModeVector k1g = k1(basis[k]);
      r = std::max(r, (t(k1g).entries() - k2(basis[k]).entries()).cwiseAbs().maxCoeff());
      for (std::size_t j = 0; j < basis.size(); ++j) {
        const double delta = (j == k) ? 1.0 : 0.0;
        r = std::max(r, std::abs(inner(k1g, k1(basis[j])) - 0.5 * delta));
        r = std::max(r, std::abs(inner(basis[k], basis[j]) - delta));
      }
    }
    return r;
  }

  void validate(double tol = kStructureTol) const {
    if (basis.empty()) throw InvalidDimension("splitting needs a non-empty basis");
    if (k2.dim() != mode_dim() || t.dim() != mode_dim())
      throw DimensionMismatch("splitting operators have different dimensions");
    for (const auto& g : basis)
      if (g.dim() != mode_dim()) throw DimensionMismatch("basis vector dimension differs from operators");
    const double r = structure_residual();
    if (!(r <= tol))
      throw InvariantViolation("splitting violates its structural identities (residual " +
                               std::to_string(r) + ")");
  }
};

/// Builds one of the two stock splittings for an n-element basis.
///  half:       M = n, K1 = K2 = I/sqrt2, T = I, g_k = e_k.
///  orthogonal: M = 2n, K1/K2 project onto the first/second half,
///              g_k = (e_k + e_{n+k})/sqrt2, T swaps the halves.
inline SplittingPair make_splitting(SplittingKind kind, int n) {
  if (n < 1) throw InvalidDimension("splitting needs n >= 1");
  if (kind == SplittingKind::custom) throw InvalidDimension("custom splittings go through make_custom_splitting");
  SplittingPair pair;
  pair.kind = kind;
  const double s = 1.0 / std::sqrt(2.0);
  if (kind == SplittingKind::half) {
    pair.k1 = scaled_multiplication(s, n);
    pair.k2 = scaled_multiplication(s, n);
    pair.t = ModeOperator::identity(n);
    for (int k = 0; k < n; ++k) pair.basis.push_back(ModeVector::unit(n, k));
  } else {
    const Index m = 2 * n;
    CMatrix p1 = CMatrix::Zero(m, m);
    CMatrix p2 = CMatrix::Zero(m, m);
    CMatrix swap = CMatrix::Zero(m, m);
    for (int k = 0; k < n; ++k) {
      p1(k, k) = 1.0;
      p2(n + k, n + k) = 1.0;
      swap(n + k, k) = 1.0;
      swap(k, n + k) = 1.0;
    }
    pair.k1 = ModeOperator(p1);
    pair.k2 = ModeOperator(p2);
    pair.t = ModeOperator(swap);
    for (int k = 0; k < n; ++k) {
      CVector g = CVector::Zero(m);
      g[k] = s;
      g[n + k] = s;
      pair.basis.emplace_back(std::move(g));
    }
  }
  pair.validate();
  return pair;
}

/// Accepts a user-supplied splitting only if every structural identity holds.
inline SplittingPair make_custom_splitting(ModeOperator k1, ModeOperator k2, ModeOperator t,
                                           std::vector<ModeVector> basis) {
  SplittingPair pair{SplittingKind::custom, std::move(k1), std::move(k2), std::move(t), std::move(basis)};
  pair.validate();
  return pair;
}

}  // namespace cotele
