#pragma once

// Seeded generators: Haar unitaries, simplex weights, Hermitian contractions.

#include <cstdint>
#include <random>
#include <vector>

#include <Eigen/QR>

#include "cotele/dense.hpp"
#include "cotele/types.hpp"

namespace cotele {

using Rng = std::mt19937_64;

/// Mixes a base seed with grid coordinates into a stream seed (splitmix64).
inline std::uint64_t derive_seed(std::uint64_t base, std::initializer_list<std::uint64_t> parts) {
  std::uint64_t z = base;
  for (std::uint64_t p : parts) {
    z += 0x9e3779b97f4a7c15ULL + p;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    z ^= z >> 31;
  }
  return z;
}

inline CMatrix ginibre(Index rows, Index cols, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  CMatrix z(rows, cols);
  for (Index c = 0; c < cols; ++c)
    for (Index r = 0; r < rows; ++r) z(r, c) = Complex(normal(rng), normal(rng));
  return z;
}

/// Haar-distributed unitary (QR of a Ginibre matrix with the R-diagonal phases fixed).
inline CMatrix haar_unitary(Index n, Rng& rng) {
  const CMatrix z = ginibre(n, n, rng);
  Eigen::HouseholderQR<CMatrix> qr(z);
  CMatrix q = qr.householderQ();
  const CMatrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (Index k = 0; k < n; ++k) {
    const double mag = std::abs(r(k, k));
    if (mag > 0.0) q.col(k) *= r(k, k) / mag;
  }
  return q;
}

/// Uniform point on the probability simplex.
inline std::vector<double> simplex_weights(std::size_t n, Rng& rng) {
  std::exponential_distribution<double> expo(1.0);
  std::vector<double> w(n);
  double total = 0.0;
  for (auto& x : w) total += (x = expo(rng));
  for (auto& x : w) x /= total;
  return w;
}

/// Random Hermitian operator with spectral norm exactly 1.
inline CMatrix hermitian_contraction(Index n, Rng& rng) {
  const CMatrix z = ginibre(n, n, rng);
  const CMatrix h = (z + z.adjoint()) / 2.0;
  const double scale = dense::eigenvalues(h).cwiseAbs().maxCoeff();
  return scale > 0.0 ? CMatrix(h / scale) : CMatrix::Identity(n, n);
}

}  // namespace cotele
