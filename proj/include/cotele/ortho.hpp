#pragma once

// Orthonormalization of non-orthogonal dictionaries, dictionary-coordinate
// operators, dense states and the partial trace over the first two factors.

#include <cmath>
#include <memory>
#include <optional>
#include <utility>
#include <vector>

#include <Eigen/Eigenvalues>

#include "cotele/coherent.hpp"
#include "cotele/dense.hpp"

namespace cotele {

/// Orthonormal coordinates for span(dictionary).
///
/// The Gram matrix G is Jacobi-scaled (unit diagonal) and diagonalized; eigen
/// directions with eigenvalue <= tol * max are dropped. The columns of
/// transform() express the orthonormal vectors in dictionary coordinates, so
/// transform^H G transform = I.
template <class Elem>
class OrthoBasis {
 public:
  template <class InnerFn>
  static OrthoBasis build(std::vector<Elem> dictionary, InnerFn&& inner_fn, double tol = kGramCutoff) {
    if (dictionary.empty()) throw DegenerateDictionary("empty dictionary");
    const Index n = static_cast<Index>(dictionary.size());
    CMatrix gram(n, n);
    for (Index i = 0; i < n; ++i) {
      gram(i, i) = inner_fn(dictionary[i], dictionary[i]);
      for (Index j = i + 1; j < n; ++j) {
        gram(i, j) = inner_fn(dictionary[i], dictionary[j]);
        gram(j, i) = std::conj(gram(i, j));
      }
    }
    return OrthoBasis(std::move(dictionary), std::move(gram), tol);
  }

  OrthoBasis(std::vector<Elem> dictionary, CMatrix gram, double tol)
      : dictionary_(std::move(dictionary)), gram_(std::move(gram)), tol_(tol) {
    const Index n = gram_.rows();
    Eigen::VectorXd scale(n);
    for (Index i = 0; i < n; ++i) {
      const double g = gram_(i, i).real();
      scale[i] = g > 0.0 ? 1.0 / std::sqrt(g) : 0.0;
    }
    const CMatrix scaled = scale.cast<Complex>().asDiagonal() * gram_ * scale.cast<Complex>().asDiagonal();
    Eigen::SelfAdjointEigenSolver<CMatrix> solver(dense::hermitian_part(scaled));
    const Eigen::VectorXd& ev = solver.eigenvalues();
    const double top = ev.size() ? ev.maxCoeff() : 0.0;
    if (!(top > 0.0)) throw DegenerateDictionary("dictionary spans only the zero vector");
    std::vector<Index> kept;
    for (Index k = 0; k < ev.size(); ++k)
      if (ev[k] > tol * top) kept.push_back(k);
    if (kept.empty()) throw DegenerateDictionary("all Gram eigenvalues below cutoff");
    rank_ = static_cast<Index>(kept.size());
    transform_.resize(n, rank_);
    for (Index c = 0; c < rank_; ++c) {
      const Index k = kept[static_cast<std::size_t>(c)];
      transform_.col(c) = scale.cast<Complex>().asDiagonal() * solver.eigenvectors().col(k) / std::sqrt(ev[k]);
    }
  }

  const std::vector<Elem>& dictionary() const { return dictionary_; }
  const CMatrix& gram() const { return gram_; }
  const CMatrix& transform() const { return transform_; }
  Index rank() const { return rank_; }
  double tol() const { return tol_; }

  /// Orthonormal coordinates of x, given overlaps_i = <d_i, x>.
  CVector coordinates_from_overlaps(const CVector& overlaps) const { return transform_.adjoint() * overlaps; }

  /// Orthonormal coordinates of sum_i alpha_i d_i.
  CVector coordinates(const CVector& alpha) const { return transform_.adjoint() * (gram_ * alpha); }

  /// Matrix of sum_ij C_ij |d_i><d_j| in the orthonormal basis.
  CMatrix embed_operator(const CMatrix& dict_coeffs) const {
    const CMatrix gx = gram_ * transform_;
    return gx.adjoint() * dict_coeffs * gx;
  }

  /// max |transform^H G transform - I|.
  double orthonormality_residual() const {
    const CMatrix id = CMatrix::Identity(rank_, rank_);
    return (transform_.adjoint() * gram_ * transform_ - id).cwiseAbs().maxCoeff();
  }

 private:
  std::vector<Elem> dictionary_;
  CMatrix gram_;
  CMatrix transform_;
  Index rank_ = 0;
  double tol_ = kGramCutoff;
};

/// Orthonormalizes a dictionary of exponential vectors exp(f_i).
inline OrthoBasis<ModeVector> orthonormalize(std::vector<ModeVector> dictionary, double tol = kGramCutoff) {
  return OrthoBasis<ModeVector>::build(std::move(dictionary), exp_inner, tol);
}

/// Orthonormalizes a dictionary of combos (e.g. exp(aK1 g_j) - exp(0)).
template <std::size_t Arity>
OrthoBasis<ExpCombo<Arity>> orthonormalize(std::vector<ExpCombo<Arity>> dictionary, double tol = kGramCutoff) {
  return OrthoBasis<ExpCombo<Arity>>::build(
      std::move(dictionary), [](const ExpCombo<Arity>& a, const ExpCombo<Arity>& b) { return combo_inner(a, b); },
      tol);
}

/// An operator sum_ij C_ij |exp k_i><exp k_j| on the span of exponential
/// (tensor) vectors. This is the exact representation every channel output
/// is carried in before it is made dense.
template <std::size_t Arity>
struct ExpOperator {
  std::vector<ExpKey<Arity>> keys;
  CMatrix coeffs;

  /// Index of key in keys, appending it when absent.
  std::size_t intern(const ExpKey<Arity>& key) {
    for (std::size_t i = 0; i < keys.size(); ++i)
      if (key_equal<Arity>(keys[i], key)) return i;
    keys.push_back(key);
    const Index n = static_cast<Index>(keys.size());
    coeffs.conservativeResize(n, n);
    coeffs.row(n - 1).setZero();
    coeffs.col(n - 1).setZero();
    return keys.size() - 1;
  }

  /// Adds w |x><y|.
  void add_outer(Complex w, const ExpCombo<Arity>& x, const ExpCombo<Arity>& y) {
    for (const auto& a : x.terms()) {
      const auto i = static_cast<Index>(intern(a.modes));
      for (const auto& b : y.terms()) {
        const auto j = static_cast<Index>(intern(b.modes));
        coeffs(i, j) += w * a.coeff * std::conj(b.coeff);
      }
    }
  }

  /// sum_s w_s |x_s><x_s|.
  static ExpOperator mixture(const std::vector<double>& weights, const std::vector<ExpCombo<Arity>>& vectors) {
    if (weights.size() != vectors.size()) throw DimensionMismatch("mixture weights and vectors differ in length");
    ExpOperator op;
    for (std::size_t s = 0; s < vectors.size(); ++s) op.add_outer(weights[s], vectors[s], vectors[s]);
    return op;
  }

  CMatrix gram() const {
    const Index n = static_cast<Index>(keys.size());
    CMatrix g(n, n);
    for (Index i = 0; i < n; ++i)
      for (Index j = 0; j < n; ++j) g(i, j) = key_inner<Arity>(keys[i], keys[j]);
    return g;
  }

  /// tr = sum_ij C_ij <k_j, k_i>.
  Complex trace() const {
    Complex t = 0.0;
    const Index n = static_cast<Index>(keys.size());
    for (Index i = 0; i < n; ++i)
      for (Index j = 0; j < n; ++j)
        if (coeffs(i, j) != Complex(0.0)) t += coeffs(i, j) * key_inner<Arity>(keys[j], keys[i]);
    return t;
  }

  /// <x, A x>.
  Complex expectation(const ExpCombo<Arity>& x) const {
    CVector overlaps(static_cast<Index>(keys.size()));
    for (std::size_t i = 0; i < keys.size(); ++i) {
      Complex s = 0.0;
      for (const auto& t : x.terms()) s += t.coeff * key_inner<Arity>(keys[i], t.modes);
      overlaps[static_cast<Index>(i)] = s;
    }
    return overlaps.dot(coeffs * overlaps);
  }

  ExpOperator& operator*=(Complex s) {
    coeffs *= s;
    return *this;
  }
};

/// A density matrix in orthonormal coordinates of a shared OrthoBasis.
template <std::size_t Arity>
struct DenseState {
  CMatrix matrix;
  std::shared_ptr<const OrthoBasis<ExpKey<Arity>>> basis;

  Index dim() const { return matrix.rows(); }
  double trace() const { return matrix.trace().real(); }
  double min_eigenvalue() const { return matrix.size() ? dense::eigenvalues(matrix).minCoeff() : 0.0; }
};

template <std::size_t Arity>
void check_same_basis(const DenseState<Arity>& a, const DenseState<Arity>& b) {
  if (a.basis != b.basis) throw DimensionMismatch("dense states live in different bases");
}

template <std::size_t Arity>
double trace_distance(const DenseState<Arity>& a, const DenseState<Arity>& b) {
  check_same_basis(a, b);
  return dense::trace_distance(a.matrix, b.matrix);
}

template <std::size_t Arity>
double fidelity(const DenseState<Arity>& a, const DenseState<Arity>& b) {
  check_same_basis(a, b);
  return dense::fidelity(a.matrix, b.matrix);
}

/// Embeds several operators (and optionally extra vectors that should be
/// representable) into one common orthonormal basis. With normalize set each
/// state is divided by its trace; traces below kZeroProbability throw.
template <std::size_t Arity>
std::vector<DenseState<Arity>> embed_common(const std::vector<ExpOperator<Arity>>& ops, bool normalize = true,
                                            const std::vector<ExpCombo<Arity>>& extra = {},
                                            double tol = kGramCutoff) {
  ExpOperator<Arity> all;
  for (const auto& op : ops)
    for (const auto& k : op.keys) all.intern(k);
  for (const auto& x : extra)
    for (const auto& t : x.terms()) all.intern(t.modes);
  auto basis = std::make_shared<const OrthoBasis<ExpKey<Arity>>>(
      OrthoBasis<ExpKey<Arity>>::build(all.keys, key_inner<Arity>, tol));
  std::vector<DenseState<Arity>> out;
  const Index n = static_cast<Index>(all.keys.size());
  for (const auto& op : ops) {
    CMatrix c = CMatrix::Zero(n, n);
    std::vector<Index> idx;
    for (const auto& k : op.keys) idx.push_back(static_cast<Index>(all.intern(k)));
    for (std::size_t i = 0; i < idx.size(); ++i)
      for (std::size_t j = 0; j < idx.size(); ++j)
        c(idx[i], idx[j]) += op.coeffs(static_cast<Index>(i), static_cast<Index>(j));
    CMatrix m = dense::hermitian_part(basis->embed_operator(c));
    if (normalize) {
      const double tr = m.trace().real();
      if (!(tr > kZeroProbability)) throw ZeroProbability("state has vanishing trace");
      m /= tr;
    }
    out.push_back(DenseState<Arity>{std::move(m), basis});
  }
  return out;
}

template <std::size_t Arity>
DenseState<Arity> embed(const ExpOperator<Arity>& op, bool normalize = true) {
  return embed_common<Arity>({op}, normalize).front();
}

/// Coordinates of a combo in the orthonormal basis of a dense state.
template <std::size_t Arity>
CVector coordinates(const DenseState<Arity>& state, const ExpCombo<Arity>& x) {
  const auto& dict = state.basis->dictionary();
  CVector overlaps(static_cast<Index>(dict.size()));
  for (std::size_t i = 0; i < dict.size(); ++i) {
    Complex s = 0.0;
    for (const auto& t : x.terms()) s += t.coeff * key_inner<Arity>(dict[i], t.modes);
    overlaps[static_cast<Index>(i)] = s;
  }
  return state.basis->coordinates_from_overlaps(overlaps);
}

/// tr_12 via tr_12(|a(x)b(x)w><a'(x)b'(x)w'|) = <a',a><b',b> |w><w'|.
inline ExpOperator<1> partial_trace_12(const ExpOperator<3>& op) {
  ExpOperator<1> out;
  const Index n = static_cast<Index>(op.keys.size());
  std::vector<std::size_t> third(op.keys.size());
  for (std::size_t i = 0; i < op.keys.size(); ++i) third[i] = out.intern({op.keys[i][2]});
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < n; ++j) {
      const Complex c = op.coeffs(i, j);
      if (c == Complex(0.0)) continue;
      const auto& ki = op.keys[static_cast<std::size_t>(i)];
      const auto& kj = op.keys[static_cast<std::size_t>(j)];
      const Complex w = std::exp(inner(kj[0], ki[0]) + inner(kj[1], ki[1]));
      out.coeffs(static_cast<Index>(third[static_cast<std::size_t>(i)]),
                 static_cast<Index>(third[static_cast<std::size_t>(j)])) += c * w;
    }
  }
  return out;
}

struct WeightedOuter {
  Complex weight;
  TensorCombo3 ket;
  TensorCombo3 bra;
};

/// tr_12 of sum_k w_k |u_k><v_k|, returned as a dense state on factor 3.
/// Normalization by the trace is optional; with it, traces below
/// kZeroProbability throw ZeroProbability.
inline DenseState<1> partial_trace_12(const std::vector<WeightedOuter>& parts, bool normalize = true) {
  ExpOperator<3> op;
  for (const auto& p : parts) op.add_outer(p.weight, p.ket, p.bra);
  return embed(partial_trace_12(op), normalize);
}

}  // namespace cotele
