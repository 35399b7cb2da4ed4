#pragma once

// Operators on exponential-vector combos: beam splitting and its adjoint,
// second quantization, the compound Malliavin derivative / Skorohod integral,
// the exchange unitary V, the vacuum projection, and operators that are only
// defined on a finite dictionary of exponential vectors (B_n, U_m).

#include <cmath>
#include <memory>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

#include "cotele/coherent.hpp"
#include "cotele/ortho.hpp"

namespace cotele {

namespace detail {

inline void check_pair_dims(const SplittingPair& pair, Index dim) {
  if (dim != 0 && dim != pair.mode_dim()) throw DimensionMismatch("combo dimension differs from splitting");
}

}  // namespace detail

/// nu: exp(f) -> exp(K1 f) (x) exp(K2 f).
inline TensorCombo2 beam_split(const SplittingPair& pair, const CoherentCombo& x) {
  detail::check_pair_dims(pair, x.factor_dim(0));
  return x.map_terms<2>([&](const ExpKey<1>& k) {
    return TensorCombo2::exponential({pair.k1(k[0]), pair.k2(k[0])});
  });
}

/// nu*: exp(h) (x) exp(g) -> exp(K1* h + K2* g).
inline CoherentCombo beam_split_adjoint(const SplittingPair& pair, const TensorCombo2& x) {
  detail::check_pair_dims(pair, x.factor_dim(0));
  detail::check_pair_dims(pair, x.factor_dim(1));
  const ModeOperator k1a = pair.k1.adjoint();
  const ModeOperator k2a = pair.k2.adjoint();
  return x.map_terms<1>([&](const ExpKey<2>& k) { return exp_vector(k1a(k[0]) + k2a(k[1])); });
}

/// Gamma(T): exp(f) -> exp(T f). With check_norm the operator must be a
/// contraction; Gamma(K) for the splitting operators is applied unchecked.
inline CoherentCombo second_quantize(const ModeOperator& t, const CoherentCombo& x, bool check_norm = true) {
  if (check_norm && !t.is_contraction()) throw NormViolation("second quantization needs ||T|| <= 1");
  return x.map_terms<1>([&](const ExpKey<1>& k) { return exp_vector(t(k[0])); });
}

/// Gamma(T) acting on factor `Factor` of a tensor combo.
template <std::size_t Factor, std::size_t Arity>
ExpCombo<Arity> second_quantize_factor(const ModeOperator& t, const ExpCombo<Arity>& x, bool check_norm = true) {
  static_assert(Factor < Arity);
  if (check_norm && !t.is_contraction()) throw NormViolation("second quantization needs ||T|| <= 1");
  return x.template map_terms<Arity>([&](const ExpKey<Arity>& k) {
    ExpKey<Arity> out = k;
    out[Factor] = t(k[Factor]);
    return ExpCombo<Arity>::exponential(std::move(out));
  });
}

/// D exp(g) = exp(g) (x) exp(g).
inline TensorCombo2 malliavin(const CoherentCombo& x) {
  return x.map_terms<2>([](const ExpKey<1>& k) { return TensorCombo2::exponential({k[0], k[0]}); });
}

/// S(exp(g) (x) exp(h)) = exp(g + h).
inline CoherentCombo skorohod(const TensorCombo2& x) {
  return x.map_terms<1>([](const ExpKey<2>& k) { return exp_vector(k[0] + k[1]); });
}

/// V: exp(f1) (x) exp(f2) -> exp((f1 - f2)/sqrt2) (x) exp((f1 + f2)/sqrt2);
/// V*: exp(f1) (x) exp(f2) -> exp((f1 + f2)/sqrt2) (x) exp((f2 - f1)/sqrt2).
inline ExpKey<2> exchange_key(const ModeVector& f1, const ModeVector& f2, bool adjoint) {
  const double s = 1.0 / std::sqrt(2.0);
  if (adjoint) return {s * (f1 + f2), s * (f2 - f1)};
  return {s * (f1 - f2), s * (f1 + f2)};
}

inline TensorCombo2 exchange(const TensorCombo2& x, bool adjoint = false) {
  if (!x.empty() && x.factor_dim(0) != x.factor_dim(1))
    throw DimensionMismatch("exchange needs equal factor dimensions");
  return x.map_terms<2>([&](const ExpKey<2>& k) {
    return TensorCombo2::exponential(exchange_key(k[0], k[1], adjoint));
  });
}

/// V (or V*) acting on the adjacent factors (First, First + 1).
template <std::size_t First, std::size_t Arity>
ExpCombo<Arity> exchange_factors(const ExpCombo<Arity>& x, bool adjoint = false) {
  static_assert(First + 1 < Arity);
  return x.template map_terms<Arity>([&](const ExpKey<Arity>& k) {
    if (k[First].dim() != k[First + 1].dim()) throw DimensionMismatch("exchange needs equal factor dimensions");
    ExpKey<Arity> out = k;
    auto v = exchange_key(k[First], k[First + 1], adjoint);
    out[First] = std::move(v[0]);
    out[First + 1] = std::move(v[1]);
    return ExpCombo<Arity>::exponential(std::move(out));
  });
}

enum class VacuumPart { vacuum, plus };

/// |exp0><exp0| x = (sum_i c_i) exp(0); F+ x = x - that.
inline CoherentCombo vacuum_project(const CoherentCombo& x, VacuumPart keep) {
  if (x.empty()) return x;
  Complex total = 0.0;
  for (const auto& t : x.terms()) total += t.coeff;
  CoherentCombo vac = exp_vector(ModeVector::zero(x.factor_dim(0)), total);
  if (keep == VacuumPart::vacuum) return vac;
  return x - vac;
}

/// Projection onto a unit combo u, acting on factor `Factor`:
/// |u><u| on that factor, identity elsewhere.
template <std::size_t Factor, std::size_t Arity>
ExpCombo<Arity> project_factor(const ExpCombo<Arity>& x, const CoherentCombo& u) {
  static_assert(Factor < Arity);
  return x.template map_terms<Arity>([&](const ExpKey<Arity>& k) {
    Complex overlap = 0.0;
    for (const auto& t : u.terms()) overlap += std::conj(t.coeff) * exp_inner(t.modes[0], k[Factor]);
    ExpCombo<Arity> out;
    for (const auto& t : u.terms()) {
      ExpKey<Arity> key = k;
      key[Factor] = t.modes[0];
      out.add(overlap * t.coeff, std::move(key));
    }
    return out;
  });
}

/// F+ on factor `Factor` of a tensor combo.
template <std::size_t Factor, std::size_t Arity>
ExpCombo<Arity> vacuum_project_factor(const ExpCombo<Arity>& x, VacuumPart keep) {
  static_assert(Factor < Arity);
  return x.template map_terms<Arity>([&](const ExpKey<Arity>& k) {
    ExpCombo<Arity> out;
    ExpKey<Arity> vac = k;
    vac[Factor] = ModeVector::zero(k[Factor].dim());
    if (keep == VacuumPart::plus) out.add(1.0, k);
    out.add(keep == VacuumPart::plus ? -1.0 : 1.0, std::move(vac));
    return out;
  });
}

/// (<w| (x) 1)(psi (x) r): Bob's unnormalized vector after Alice projects
/// factors 1-2 of psi (x) r onto w.
inline CoherentCombo contract_12(const TensorCombo2& w, const CoherentCombo& psi, const TensorCombo2& r) {
  CoherentCombo out;
  for (const auto& rt : r.terms()) {
    Complex amp = 0.0;
    for (const auto& wt : w.terms()) {
      Complex inner_psi = 0.0;
      for (const auto& pt : psi.terms()) inner_psi += pt.coeff * exp_inner(wt.modes[0], pt.modes[0]);
      amp += std::conj(wt.coeff) * inner_psi * exp_inner(wt.modes[1], rt.modes[0]);
    }
    out.add(amp * rt.coeff, {rt.modes[1]});
  }
  return out;
}

/// An operator known only through its images of a finite dictionary of
/// exponential vectors exp(k_i) -> images_i, extended linearly.
///
/// Terms whose mode vector is not a dictionary key are accepted only if the
/// remainder lies in span{exp(k_i)} (projection residual below tol); anything
/// else has no defined action and throws UndefinedAction.
class DictionaryOperator {
 public:
  DictionaryOperator() = default;
  DictionaryOperator(std::string label, std::vector<ModeVector> keys, std::vector<CoherentCombo> images,
                     bool unitary, double tol = kIdentityTol)
      : label_(std::move(label)), keys_(std::move(keys)), images_(std::move(images)), unitary_(unitary), tol_(tol) {
    if (keys_.size() != images_.size()) throw DimensionMismatch("dictionary keys and images differ in number");
    if (keys_.empty()) throw DegenerateDictionary("dictionary operator needs at least one key");
    basis_ = std::make_shared<const OrthoBasis<ModeVector>>(orthonormalize(keys_));
  }

  const std::string& label() const { return label_; }
  const std::vector<ModeVector>& keys() const { return keys_; }
  const std::vector<CoherentCombo>& images() const { return images_; }
  bool unitary() const { return unitary_; }

  CoherentCombo operator()(const CoherentCombo& x) const {
    CoherentCombo out;
    CoherentCombo rest;
    for (const auto& t : x.terms()) {
      const int i = find(t.modes[0]);
      if (i >= 0)
        out += t.coeff * images_[static_cast<std::size_t>(i)];
      else
        rest.add(t.coeff, t.modes);
    }
    if (!rest.empty()) out += apply_by_projection(rest);
    return out;
  }

  /// Acting on factor `Factor` of a tensor combo.
  template <std::size_t Factor, std::size_t Arity>
  ExpCombo<Arity> on_factor(const ExpCombo<Arity>& x) const {
    static_assert(Factor < Arity);
    return x.template map_terms<Arity>([&](const ExpKey<Arity>& k) {
      const CoherentCombo img = (*this)(exp_vector(k[Factor]));
      ExpCombo<Arity> out;
      for (const auto& t : img.terms()) {
        ExpKey<Arity> key = k;
        key[Factor] = t.modes[0];
        out.add(t.coeff, std::move(key));
      }
      return out;
    });
  }

 private:
  int find(const ModeVector& f) const {
    for (std::size_t i = 0; i < keys_.size(); ++i)
      if (keys_[i].approx_equal(f)) return static_cast<int>(i);
    return -1;
  }

  CoherentCombo apply_by_projection(const CoherentCombo& x) const {
    const auto& dict = basis_->dictionary();
    CVector overlaps(static_cast<Index>(dict.size()));
    for (std::size_t i = 0; i < dict.size(); ++i) {
      Complex s = 0.0;
      for (const auto& t : x.terms()) s += t.coeff * exp_inner(dict[i], t.modes[0]);
      overlaps[static_cast<Index>(i)] = s;
    }
    const CVector y = basis_->coordinates_from_overlaps(overlaps);
    const double total = combo_norm_squared(x);
    const double residual = std::sqrt(std::max(0.0, total - y.squaredNorm()));
    if (residual > tol_ * std::max(1.0, std::sqrt(total)))
      throw UndefinedAction(label_ + " is not defined outside its dictionary span");
    const CVector alpha = basis_->transform() * y;
    CoherentCombo out;
    for (std::size_t i = 0; i < images_.size(); ++i) out += alpha[static_cast<Index>(i)] * images_[i];
    return out;
  }

  std::string label_;
  std::vector<ModeVector> keys_;
  std::vector<CoherentCombo> images_;
  bool unitary_ = false;
  double tol_ = kIdentityTol;
  std::shared_ptr<const OrthoBasis<ModeVector>> basis_;
};

/// j (+) m on 1-based indices: ((j + m - 1) mod N) + 1.
inline int cyclic_shift(int j, int m, int n) { return ((j + m - 1) % n + n) % n + 1; }

/// Default phase matrix b_nj = e^{2 pi i n j / N}, 1-based n, j.
inline CMatrix dft_phases(int n) {
  CMatrix b(n, n);
  for (int r = 1; r <= n; ++r)
    for (int c = 1; c <= n; ++c) b(r - 1, c - 1) = std::polar(1.0, 2.0 * std::numbers::pi * r * c / n);
  return b;
}

/// Largest violation of |b_nk| = 1 and <b_n, b_j> = 0 (n != j).
inline double phase_matrix_residual(const CMatrix& b) {
  if (b.rows() != b.cols() || b.rows() == 0) return INFINITY;
  double r = (b.cwiseAbs().array() - 1.0).abs().maxCoeff();
  const CMatrix g = b.conjugate() * b.transpose();
  for (Index i = 0; i < g.rows(); ++i)
    for (Index j = 0; j < g.cols(); ++j)
      if (i != j) r = std::max(r, std::abs(g(i, j)));
  return r;
}

/// B_n on the dictionary {exp(a K1 g_j)} u {exp(0)}:
/// exp(aK1g_j) - exp(0) -> b_nj (exp(aK1g_j) - exp(0)), exp(0) fixed.
inline DictionaryOperator phase_unitary(int n, const CMatrix& phases, const std::vector<ModeVector>& shifted_modes,
                                        bool adjoint = false) {
  const int size = static_cast<int>(shifted_modes.size());
  if (n < 1 || n > size || phases.rows() != size) throw IndexOutOfRange("phase index out of range");
  const ModeVector zero = ModeVector::zero(shifted_modes.front().dim());
  std::vector<ModeVector> keys;
  std::vector<CoherentCombo> images;
  for (int j = 1; j <= size; ++j) {
    Complex b = phases(n - 1, j - 1);
    if (adjoint) b = std::conj(b);
    const ModeVector& f = shifted_modes[static_cast<std::size_t>(j - 1)];
    keys.push_back(f);
    CoherentCombo img = exp_vector(f, b);
    img.add(1.0 - b, {zero});
    images.push_back(std::move(img));
  }
  keys.push_back(zero);
  images.push_back(exp_vector(zero));
  return DictionaryOperator((adjoint ? "B*_" : "B_") + std::to_string(n), std::move(keys), std::move(images), true);
}

/// U_m: exp(aK1g_j) -> exp(aK1g_{j (+) m}), exp(0) fixed.
inline DictionaryOperator shift_unitary(int m, const std::vector<ModeVector>& shifted_modes, bool adjoint = false) {
  const int size = static_cast<int>(shifted_modes.size());
  if (m < 1 || m > size) throw IndexOutOfRange("shift index out of range");
  const ModeVector zero = ModeVector::zero(shifted_modes.front().dim());
  std::vector<ModeVector> keys;
  std::vector<CoherentCombo> images;
  for (int j = 1; j <= size; ++j) {
    const int target = cyclic_shift(j, adjoint ? -m : m, size);
    keys.push_back(shifted_modes[static_cast<std::size_t>(j - 1)]);
    images.push_back(exp_vector(shifted_modes[static_cast<std::size_t>(target - 1)]));
  }
  keys.push_back(zero);
  images.push_back(exp_vector(zero));
  return DictionaryOperator((adjoint ? "U*_" : "U_") + std::to_string(m), std::move(keys), std::move(images), true);
}

}  // namespace cotele
