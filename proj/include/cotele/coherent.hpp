#pragma once

// Finite linear combinations of (tensor products of) exponential vectors.
//
// An ExpCombo<A> is sum_i c_i exp(f_i^1) (x) ... (x) exp(f_i^A). Inner products
// are evaluated in closed form through <exp f, exp g> = e^{<f,g>}, so nothing
// here is truncated.

#include <array>
#include <cmath>
#include <cstddef>
#include <utility>
#include <vector>

#include "cotele/mode_space.hpp"

namespace cotele {

template <std::size_t Arity>
using ExpKey = std::array<ModeVector, Arity>;

/// <exp f, exp g> = e^{<f,g>}.
inline Complex exp_inner(const ModeVector& f, const ModeVector& g) { return std::exp(inner(f, g)); }

template <std::size_t Arity>
Complex key_inner(const ExpKey<Arity>& a, const ExpKey<Arity>& b) {
  Complex s = 0.0;
  for (std::size_t k = 0; k < Arity; ++k) s += inner(a[k], b[k]);
  return std::exp(s);
}

template <std::size_t Arity>
bool key_equal(const ExpKey<Arity>& a, const ExpKey<Arity>& b, double tol = kDedupTol) {
  for (std::size_t k = 0; k < Arity; ++k)
    if (!a[k].approx_equal(b[k], tol)) return false;
  return true;
}

template <std::size_t Arity>
struct ExpTerm {
  Complex coeff;
  ExpKey<Arity> modes;
};

template <std::size_t Arity>
class ExpCombo {
  static_assert(Arity >= 1);

 public:
  static constexpr std::size_t arity = Arity;
  using Key = ExpKey<Arity>;
  using Term = ExpTerm<Arity>;

  ExpCombo() = default;

  static ExpCombo exponential(Key modes, Complex coeff = 1.0) {
    ExpCombo c;
    c.add(coeff, std::move(modes));
    return c;
  }

  /// Adds c * exp(modes); merges with an existing term whose modes agree
  /// within kDedupTol per entry. Exact-zero coefficients are dropped.
  void add(Complex coeff, Key modes) {
    if (coeff == Complex(0.0)) return;
    check_dims(modes);
    for (auto& t : terms_) {
      if (key_equal<Arity>(t.modes, modes)) {
        t.coeff += coeff;
        return;
      }
    }
    terms_.push_back(Term{coeff, std::move(modes)});
  }

  const std::vector<Term>& terms() const { return terms_; }
  std::size_t size() const { return terms_.size(); }
  bool empty() const { return terms_.empty(); }

  /// Per-factor mode dimension, or 0 for an empty combo.
  Index factor_dim(std::size_t k) const { return terms_.empty() ? 0 : terms_.front().modes[k].dim(); }

  ExpCombo& operator+=(const ExpCombo& o) {
    for (const auto& t : o.terms_) add(t.coeff, t.modes);
    return *this;
  }
  ExpCombo& operator-=(const ExpCombo& o) {
    for (const auto& t : o.terms_) add(-t.coeff, t.modes);
    return *this;
  }
  ExpCombo& operator*=(Complex s) {
    if (s == Complex(0.0)) {
      terms_.clear();
      return *this;
    }
    for (auto& t : terms_) t.coeff *= s;
    return *this;
  }
  friend ExpCombo operator+(ExpCombo a, const ExpCombo& b) { return a += b; }
  friend ExpCombo operator-(ExpCombo a, const ExpCombo& b) { return a -= b; }
  friend ExpCombo operator*(Complex s, ExpCombo a) { return a *= s; }
  friend ExpCombo operator*(double s, ExpCombo a) { return a *= Complex(s); }

  /// Image under a termwise map Key -> ExpCombo<B>.
  template <std::size_t B, class Fn>
  ExpCombo<B> map_terms(Fn&& fn) const {
    ExpCombo<B> out;
    for (const auto& t : terms_) {
      const ExpCombo<B> img = fn(t.modes);
      for (const auto& u : img.terms()) out.add(t.coeff * u.coeff, u.modes);
    }
    return out;
  }

 private:
  void check_dims(const Key& modes) const {
    if (terms_.empty()) return;
    for (std::size_t k = 0; k < Arity; ++k)
      if (modes[k].dim() != terms_.front().modes[k].dim())
        throw DimensionMismatch("combo terms have inconsistent factor dimensions");
  }

  std::vector<Term> terms_;
};

using CoherentCombo = ExpCombo<1>;
using TensorCombo2 = ExpCombo<2>;
using TensorCombo3 = ExpCombo<3>;

/// The (unnormalized) exponential vector exp(f).
inline CoherentCombo exp_vector(const ModeVector& f, Complex coeff = 1.0) {
  return CoherentCombo::exponential({f}, coeff);
}

/// The normalized coherent vector |exp(f)> = e^{-|f|^2/2} exp(f).
inline CoherentCombo coherent_vector(const ModeVector& f) {
  return exp_vector(f, std::exp(-0.5 * f.norm_squared()));
}

inline CoherentCombo vacuum(Index dim) { return exp_vector(ModeVector::zero(dim)); }

/// sum_ij conj(x_i) y_j prod_k <exp f_ik, exp g_jk>.
template <std::size_t Arity>
Complex combo_inner(const ExpCombo<Arity>& x, const ExpCombo<Arity>& y) {
  if (!x.empty() && !y.empty())
    for (std::size_t k = 0; k < Arity; ++k)
      if (x.factor_dim(k) != y.factor_dim(k)) throw DimensionMismatch("combo factor dimensions differ");
  Complex s = 0.0;
  for (const auto& a : x.terms())
    for (const auto& b : y.terms()) s += std::conj(a.coeff) * b.coeff * key_inner<Arity>(a.modes, b.modes);
  return s;
}

template <std::size_t Arity>
double combo_norm_squared(const ExpCombo<Arity>& x) {
  return std::max(0.0, combo_inner(x, x).real());
}

template <std::size_t Arity>
double combo_norm(const ExpCombo<Arity>& x) {
  return std::sqrt(combo_norm_squared(x));
}

/// |x> = x / ||x||.
template <std::size_t Arity>
ExpCombo<Arity> normalized(const ExpCombo<Arity>& x) {
  const double n = combo_norm(x);
  if (!(n > 0.0)) throw ZeroProbability("cannot normalize a zero vector");
  return (1.0 / n) * x;
}

/// ||x - y||.
template <std::size_t Arity>
double combo_distance(const ExpCombo<Arity>& x, const ExpCombo<Arity>& y) {
  return combo_norm(x - y);
}

/// x (x) y.
template <std::size_t A, std::size_t B>
ExpCombo<A + B> tensor(const ExpCombo<A>& x, const ExpCombo<B>& y) {
  ExpCombo<A + B> out;
  for (const auto& a : x.terms()) {
    for (const auto& b : y.terms()) {
      ExpKey<A + B> key;
      for (std::size_t k = 0; k < A; ++k) key[k] = a.modes[k];
      for (std::size_t k = 0; k < B; ++k) key[A + k] = b.modes[k];
      out.add(a.coeff * b.coeff, std::move(key));
    }
  }
  return out;
}

template <std::size_t A, std::size_t B, std::size_t C>
ExpCombo<A + B + C> tensor(const ExpCombo<A>& x, const ExpCombo<B>& y, const ExpCombo<C>& z) {
  return tensor(tensor(x, y), z);
}

}  // namespace cotele
