#pragma once

// Brute-force Fock space over C^M in the occupation-number basis with a cap
// on the total photon number. Used only to cross-check the closed-form
// engine on small instances.

#include <cmath>
#include <cstdint>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include <Eigen/SparseCore>

#include "cotele/models.hpp"

namespace cotele {

class TruncatedFock {
 public:
  TruncatedFock(int modes, int n_max) : modes_(modes), n_max_(n_max) {
    if (modes < 1) throw InvalidDimension("oracle needs at least one mode");
    if (n_max < 0) throw InvalidDimension("photon cutoff must be non-negative");
    std::vector<int> tuple(static_cast<std::size_t>(modes), 0);
    enumerate(tuple, 0, n_max);
  }

  int modes() const { return modes_; }
  int cutoff() const { return n_max_; }
  Index dim() const { return static_cast<Index>(tuples_.size()); }
  const std::vector<int>& tuple(Index i) const { return tuples_[static_cast<std::size_t>(i)]; }

  /// Index of an occupation tuple, or -1 when its total exceeds the cutoff.
  Index find(const std::vector<int>& t) const {
    int total = 0;
    for (int x : t) total += x;
    if (total > n_max_) return -1;
    const auto it = index_.find(encode(t));
    return it == index_.end() ? -1 : it->second;
  }

  /// C(M + n_max, M).
  static double expected_dim(int modes, int n_max) {
    double r = 1.0;
    for (int k = 1; k <= modes; ++k) r = r * (n_max + k) / k;
    return r;
  }

 private:
  void enumerate(std::vector<int>& t, std::size_t pos, int left) {
    if (pos == t.size()) {
      index_.emplace(encode(t), static_cast<Index>(tuples_.size()));
      tuples_.push_back(t);
      return;
    }
    for (int k = 0; k <= left; ++k) {
      t[pos] = k;
      enumerate(t, pos + 1, left - k);
    }
    t[pos] = 0;
  }

  std::uint64_t encode(const std::vector<int>& t) const {
    std::uint64_t key = 0;
    for (int x : t) key = key * static_cast<std::uint64_t>(n_max_ + 1) + static_cast<std::uint64_t>(x);
    return key;
  }

  int modes_;
  int n_max_;
  std::vector<std::vector<int>> tuples_;
  std::unordered_map<std::uint64_t, Index> index_;
};

struct OracleVector {
  CVector amplitudes;
  /// Bound on the squared norm lost to the cutoff.
  double tail = 0.0;
};

/// e^x - sum_{k <= n} x^k / k!.
inline double exp_tail(double x, int n) {
  double term = 1.0;
  double partial = 1.0;
  for (int k = 1; k <= n; ++k) {
    term *= x / k;
    partial += term;
  }
  return std::max(0.0, std::exp(x) - partial);
}

/// Truncated exp(g): amplitude prod_i g_i^{n_i} / sqrt(n_i!).
inline OracleVector oracle_exp(const TruncatedFock& space, const ModeVector& g, bool enforce_tail = true) {
  if (g.dim() != space.modes()) throw DimensionMismatch("mode vector and oracle space differ in modes");
  const double x = g.norm_squared();
  if (enforce_tail && x > space.cutoff() / 4.0)
    throw ResourceLimit("photon cutoff " + std::to_string(space.cutoff()) + " too small for |g|^2 = " +
                        std::to_string(x));
  OracleVector out;
  out.amplitudes.resize(space.dim());
  for (Index i = 0; i < space.dim(); ++i) {
    const auto& t = space.tuple(i);
    Complex a = 1.0;
    for (int k = 0; k < space.modes(); ++k) {
      const int nk = t[static_cast<std::size_t>(k)];
      if (nk > 0) a *= std::pow(g[k], nk) / std::sqrt(std::tgamma(nk + 1.0));
    }
    out.amplitudes[i] = a;
  }
  out.tail = exp_tail(x, space.cutoff());
  return out;
}

/// Gamma(T) sector by sector: substitute a+_i -> sum_j T_ji a+_j in
/// prod_i (a+_i)^{n_i} / sqrt(n_i!) |0>.
inline OracleVector oracle_second_quantize(const TruncatedFock& space, const ModeOperator& t, const OracleVector& v,
                                           bool check_norm = true) {
  if (t.dim() != space.modes()) throw DimensionMismatch("operator and oracle space differ in modes");
  if (v.amplitudes.size() != space.dim()) throw DimensionMismatch("oracle vector has the wrong length");
  if (check_norm && !t.is_contraction()) throw NormViolation("Gamma(T) needs |T| <= 1");
  const int m = space.modes();
  const CMatrix& tm = t.entries();
  OracleVector out;
  out.amplitudes = CVector::Zero(space.dim());
  out.tail = v.tail;
  std::vector<double> sqrt_fact(static_cast<std::size_t>(space.cutoff() + 1));
  for (std::size_t k = 0; k < sqrt_fact.size(); ++k) sqrt_fact[k] = std::sqrt(std::tgamma(double(k) + 1.0));

  for (Index src = 0; src < space.dim(); ++src) {
    const Complex c = v.amplitudes[src];
    if (c == Complex(0.0)) continue;
    const auto& n = space.tuple(src);
    // monomial coefficients, keyed by oracle index (degree never exceeds the cutoff)
    std::unordered_map<Index, Complex> poly{{space.find(std::vector<int>(static_cast<std::size_t>(m), 0)), c}};
    double norm = 1.0;
    for (int i = 0; i < m; ++i) {
      norm *= sqrt_fact[static_cast<std::size_t>(n[static_cast<std::size_t>(i)])];
      for (int r = 0; r < n[static_cast<std::size_t>(i)]; ++r) {
        std::unordered_map<Index, Complex> next;
        for (const auto& [idx, coeff] : poly) {
          std::vector<int> k = space.tuple(idx);
          for (int j = 0; j < m; ++j) {
            if (tm(j, i) == Complex(0.0)) continue;
            ++k[static_cast<std::size_t>(j)];
            next[space.find(k)] += coeff * tm(j, i);
            --k[static_cast<std::size_t>(j)];
          }
        }
        poly = std::move(next);
      }
    }
    for (const auto& [idx, coeff] : poly) {
      double f = 1.0;
      for (int x : space.tuple(idx)) f *= sqrt_fact[static_cast<std::size_t>(x)];
      out.amplitudes[idx] += coeff * f / norm;
    }
  }
  return out;
}

/// Dense Gamma(T) as a dim x dim matrix.
inline CMatrix oracle_second_quantize_matrix(const TruncatedFock& space, const ModeOperator& t) {
  CMatrix out(space.dim(), space.dim());
  for (Index i = 0; i < space.dim(); ++i) {
    OracleVector e{CVector::Unit(space.dim(), i), 0.0};
    out.col(i) = oracle_second_quantize(space, t, e).amplitudes;
  }
  return out;
}

/// F+ = 1 - |vac><vac| in the occupation basis.
inline CMatrix oracle_vacuum_complement(const TruncatedFock& space) {
  CMatrix p = CMatrix::Identity(space.dim(), space.dim());
  const Index vac = space.find(std::vector<int>(static_cast<std::size_t>(space.modes()), 0));
  p(vac, vac) = 0.0;
  return p;
}

/// Engine combo rendered in the oracle basis.
inline CVector oracle_render(const TruncatedFock& space, const CoherentCombo& x) {
  CVector out = CVector::Zero(space.dim());
  for (const auto& t : x.terms()) out += t.coeff * oracle_exp(space, t.modes[0], false).amplitudes;
  return out;
}

/// Engine operator rendered in the oracle basis.
inline CMatrix oracle_render(const TruncatedFock& space, const ExpOperator<1>& op) {
  CMatrix v(space.dim(), static_cast<Index>(op.keys.size()));
  for (std::size_t i = 0; i < op.keys.size(); ++i)
    v.col(static_cast<Index>(i)) = oracle_exp(space, op.keys[i][0], false).amplitudes;
  return v * op.coeffs * v.adjoint();
}

/// sum_k w_k a_k (x) b_k (x) c_k, one product per term.
struct OracleProduct3 {
  Complex coeff;
  CVector a, b, c;
};

/// tr_12 |u><u| for u a sum of product terms, dense on factor 3.
inline CMatrix oracle_partial_trace_12(const std::vector<OracleProduct3>& ket) {
  if (ket.empty()) throw DimensionMismatch("empty oracle ket");
  const Index d3 = ket.front().c.size();
  CMatrix out = CMatrix::Zero(d3, d3);
  for (const auto& u : ket)
    for (const auto& v : ket)
      out += u.coeff * std::conj(v.coeff) * v.a.dot(u.a) * v.b.dot(u.b) * (u.c * v.c.adjoint());
  return out;
}

struct OracleComparison {
  std::string name;
  double engine = 0.0;
  double oracle = 0.0;
  double abs_error = 0.0;
  double tolerance = 0.0;
  bool passed = false;
};

struct OracleReport {
  int modes = 0;
  int cutoff = 0;
  Index dim = 0;
  double tail = 0.0;
  std::vector<OracleComparison> rows;

  bool passed() const {
    for (const auto& r : rows)
      if (!r.passed) return false;
    return !rows.empty();
  }
};

/// Smallest cutoff with exp_tail(x, n) <= target, capped at 20.
inline int choose_cutoff(double x, double target = 1e-12) {
  for (int n = 1; n <= 20; ++n)
    if (exp_tail(x, n) <= target && x <= n / 4.0) return n;
  return 20;
}

/// Perfect, half and full channel probabilities (and Bob states for the
/// first two) recomputed by dense linear algebra in a truncated Fock space.
inline OracleReport oracle_channel_check(const TeleportModel& model, const InputState& input, int n, int m,
                                         int n_max = 0, double max_dim = 4000) {
  model.check_index(n);
  model.check_index(m);
  const int big_m = static_cast<int>(model.mode_dim());
  if (big_m > 4) throw ResourceLimit("oracle supports M <= 4");
  if (model.density() > 1.0) throw ResourceLimit("oracle supports d <= 1");
  const int nn = model.n_dim();
  double x_max = 0.0;
  for (int r = 1; r <= 2; ++r)
    for (int j = 1; j <= nn; ++j) x_max = std::max(x_max, model.mode(r, j).norm_squared());
  if (n_max == 0) n_max = choose_cutoff(x_max);
  if (n_max > 20) throw ResourceLimit("oracle cutoff is capped at 20");
  if (TruncatedFock::expected_dim(big_m, n_max) > max_dim) throw ResourceLimit("oracle dimension over budget");
  input.validate(nn);

  const TruncatedFock space(big_m, n_max);
  const Index dim = space.dim();
  const CVector vac = oracle_exp(space, ModeVector::zero(big_m)).amplitudes;
  auto coherent = [&](const ModeVector& f) {
    const CVector v = oracle_exp(space, f).amplitudes;
    return CVector(v / v.norm());
  };
  auto shifted = [&](int r, int j) {
    const CVector v = oracle_exp(space, model.mode(r, j)).amplitudes - vac;
    return CVector(v / v.norm());
  };

  std::vector<CVector> e1, e2, c1, c2;
  for (int j = 1; j <= nn; ++j) {
    e1.push_back(shifted(1, j));
    e2.push_back(shifted(2, j));
    c1.push_back(coherent(model.mode(1, j)));
    c2.push_back(coherent(model.mode(2, j)));
  }
  std::vector<CVector> psi;
  for (int s = 0; s < nn; ++s) {
    CVector v = CVector::Zero(dim);
    for (int j = 0; j < nn; ++j) v += input.coeffs(s, j) * e1[static_cast<std::size_t>(j)];
    psi.push_back(v);
  }

  // two-factor vectors as dim x dim coefficient matrices
  const double rn = 1.0 / std::sqrt(double(nn));
  CMatrix xi = CMatrix::Zero(dim, dim);
  CMatrix xi_nm = CMatrix::Zero(dim, dim);
  CMatrix xi_t = CMatrix::Zero(dim, dim);
  for (int j = 0; j < nn; ++j) {
    const auto sj = static_cast<std::size_t>(j);
    xi += rn * e1[sj] * e2[sj].transpose();
    xi_nm += rn * model.phases()(n - 1, j) * e1[sj] *
             e1[static_cast<std::size_t>(cyclic_shift(j + 1, m, nn) - 1)].transpose();
    xi_t += model.gamma() * rn * c1[sj] * c2[sj].transpose();
  }
  xi_t /= xi_t.norm();  // the norm is gamma-forced; renormalize against truncation

  // B_n = 1 + sum_j (b_nj - 1)|e_j><e_j|, U_m = 1 + sum_j (|e_{j(+)m}> - |e_j>)<e_j|,
  // so (B_n (x) U_m Gamma(T*)) xi~ = B_n xi~ Gamma(T*)^T U_m^T is applied as low-rank updates.
  CMatrix y = xi_t * oracle_second_quantize_matrix(space, model.pair().t.adjoint()).sparseView().transpose();
  CMatrix xi_full = y;
  for (int j = 0; j < nn; ++j) {
    const CVector& ej = e1[static_cast<std::size_t>(j)];
    const CVector& fj = e1[static_cast<std::size_t>(cyclic_shift(j + 1, m, nn) - 1)];
    xi_full += (y * ej.conjugate()) * (fj - ej).transpose();
  }
  y = xi_full;
  for (int j = 0; j < nn; ++j) {
    const CVector& ej = e1[static_cast<std::size_t>(j)];
    xi_full += (model.phases()(n - 1, j) - 1.0) * ej * (ej.adjoint() * y);
  }
  const CMatrix f_plus = oracle_vacuum_complement(space);

  struct Dense {
    double probability;
    CMatrix state;
  };
  auto channel = [&](const CMatrix& w, const CMatrix& r, bool post) {
    Dense out{0.0, CMatrix::Zero(dim, dim)};
    for (int s = 0; s < nn; ++s) {
      const double lam = input.weights[static_cast<std::size_t>(s)];
      if (lam == 0.0) continue;
      const CVector t = w.adjoint() * psi[static_cast<std::size_t>(s)];
      CVector v = r.transpose() * t;
      if (post) v = f_plus * v;
      const double wn = w.squaredNorm();
      out.state += lam * wn * v * v.adjoint();
    }
    out.probability = out.state.trace().real();
    out.state /= out.probability;
    return out;
  };

  OracleReport rep;
  rep.modes = big_m;
  rep.cutoff = n_max;
  rep.dim = dim;
  rep.tail = exp_tail(x_max, n_max);
  const double tol = std::max(1e-6, rep.tail);
  auto add = [&](std::string name, double engine, double oracle) {
    const double err = std::abs(engine - oracle);
    rep.rows.push_back(OracleComparison{std::move(name), engine, oracle, err, tol, err <= tol});
  };

  const auto perfect = channel(xi_nm, xi, false);
  const auto half = channel(xi_nm, xi_t, true);
  const auto full = channel(xi_full, xi_t, true);
  const auto e_perfect = channel_perfect(model, input, n, m);
  const auto e_half = channel_half(model, input, n, m);
  const auto e_full = channel_full(model, input, n, m);
  add("perfect probability", e_perfect.probability, perfect.probability);
  add("half probability", e_half.probability, half.probability);
  add("full probability", e_full.probability, full.probability);
  add("perfect state (trace norm)", 0.0,
      dense::trace_norm(oracle_render(space, e_perfect.state) - perfect.state));
  add("half state (trace norm)", 0.0, dense::trace_norm(oracle_render(space, e_half.state) - half.state));

  // aggregate of the half family against its closed form
  double total = 0.0;
  for (int a = 1; a <= nn; ++a) {
    for (int b = 1; b <= nn; ++b) {
      CMatrix w = CMatrix::Zero(dim, dim);
      for (int j = 0; j < nn; ++j)
        w += rn * model.phases()(a - 1, j) * e1[static_cast<std::size_t>(j)] *
             e1[static_cast<std::size_t>(cyclic_shift(j + 1, b, nn) - 1)].transpose();
      total += channel(w, xi_t, true).probability;
    }
  }
  const double ed = std::exp(-model.density() / 2.0);
  add("half aggregate", (1.0 - ed) * (1.0 - ed) / (1.0 + (nn - 1) * std::exp(-model.density())), total);
  return rep;
}

}  // namespace cotele
