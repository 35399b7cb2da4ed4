#pragma once

// Small dense helpers on Hermitian matrices: spectra, square roots, norms,
// fidelity and trace distance.

#include <algorithm>
#include <cmath>
#include <vector>

#include <Eigen/Eigenvalues>

#include "cotele/types.hpp"

namespace cotele::dense {

inline CMatrix hermitian_part(const CMatrix& m) { return (m + m.adjoint()) / 2.0; }

inline Eigen::VectorXd eigenvalues(const CMatrix& h) {
  Eigen::SelfAdjointEigenSolver<CMatrix> solver(hermitian_part(h), Eigen::EigenvaluesOnly);
  return solver.eigenvalues();
}

/// Square root of a positive semidefinite matrix; negative round-off
/// eigenvalues are clamped to zero.
inline CMatrix psd_sqrt(const CMatrix& h) {
  Eigen::SelfAdjointEigenSolver<CMatrix> solver(hermitian_part(h));
  Eigen::VectorXd ev = solver.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  const CMatrix& q = solver.eigenvectors();
  return q * ev.cast<Complex>().asDiagonal() * q.adjoint();
}

inline double trace_norm(const CMatrix& h) { return eigenvalues(h).cwiseAbs().sum(); }

/// Half the trace norm of the difference.
inline double trace_distance(const CMatrix& rho, const CMatrix& sigma) {
  return 0.5 * trace_norm(rho - sigma);
}

/// Uhlmann fidelity (tr sqrt(sqrt(rho) sigma sqrt(rho)))^2.
/// Eigenvalues below cutoff * (largest) are treated as zero in both square
/// roots; otherwise round-off of order 1e-16 leaks in at order 1e-8.
inline double fidelity(const CMatrix& rho, const CMatrix& sigma, double cutoff = 1e-13) {
  Eigen::SelfAdjointEigenSolver<CMatrix> solver(hermitian_part(rho));
  const Eigen::VectorXd& ev = solver.eigenvalues();
  const double top = ev.size() ? std::max(ev.maxCoeff(), 0.0) : 0.0;
  std::vector<Index> keep;
  for (Index i = 0; i < ev.size(); ++i)
    if (ev[i] > cutoff * top) keep.push_back(i);
  if (keep.empty()) return 0.0;
  CMatrix half(rho.rows(), static_cast<Index>(keep.size()));
  for (std::size_t k = 0; k < keep.size(); ++k)
    half.col(static_cast<Index>(k)) = std::sqrt(ev[keep[k]]) * solver.eigenvectors().col(keep[k]);
  const Eigen::VectorXd mu = eigenvalues(half.adjoint() * hermitian_part(sigma) * half);
  const double mu_top = std::max(mu.maxCoeff(), 0.0);
  double t = 0.0;
  for (Index i = 0; i < mu.size(); ++i)
    if (mu[i] > cutoff * mu_top) t += std::sqrt(mu[i]);
  return t * t;
}

inline double operator_norm(const CMatrix& m) {
  if (m.size() == 0) return 0.0;
  Eigen::JacobiSVD<CMatrix> svd(m);
  return svd.singularValues()(0);
}

inline bool is_unitary(const CMatrix& u, double tol) {
  if (u.rows() != u.cols()) return false;
  const auto id = CMatrix::Identity(u.rows(), u.cols());
  return (u.adjoint() * u - id).cwiseAbs().maxCoeff() <= tol &&
         (u * u.adjoint() - id).cwiseAbs().maxCoeff() <= tol;
}

inline bool all_finite(const CMatrix& m) {
  for (Index i = 0; i < m.size(); ++i) {
    const Complex z = m.data()[i];
    if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) return false;
  }
  return true;
}

inline bool all_finite(const CVector& v) {
  for (Index i = 0; i < v.size(); ++i) {
    if (!std::isfinite(v[i].real()) || !std::isfinite(v[i].imag())) return false;
  }
  return true;
}

}  // namespace cotele::dense
