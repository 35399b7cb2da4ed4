#pragma once

// Lemma and theorem checks, parameter sweeps and their CSV / JSON output.
// Every closed form below is evaluated from its formula alone; the other
// side of each comparison comes from the channel / operator machinery.

#include <cmath>
#include <cstdint>
#include <cstring>
#include <future>
#include <numbers>
#include <ostream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "cotele/models.hpp"

namespace cotele {

struct LemmaReport {
  LemmaReport() = default;
  LemmaReport(std::string name_, int n, double d) : name(std::move(name_)), n_dim(n), density(d) {}

  std::string name;
  int n_dim = 0;
  double density = 0.0;
  std::vector<Complex> computed;
  std::vector<Complex> closed_form;
  double abs_error = 0.0;
  double tolerance = 0.0;
  bool passed = false;
  /// Informational rows are reported but never fail a run.
  bool gating = true;

  void finish() {
    abs_error = 0.0;
    for (std::size_t i = 0; i < computed.size() && i < closed_form.size(); ++i)
      abs_error = std::max(abs_error, std::abs(computed[i] - closed_form[i]));
    passed = abs_error <= tolerance;
  }
};

inline bool all_passed(const std::vector<LemmaReport>& reports) {
  for (const auto& r : reports)
    if (r.gating && !r.passed) return false;
  return true;
}

namespace closed_form {

/// e^{-d/2}.
inline double decay(double d) { return std::exp(-d / 2.0); }

inline double gamma(int n, double d) { return std::sqrt(1.0 / (1.0 + (n - 1) * std::exp(-d))); }

/// Aggregate success probability of the half-perfect family.
inline double half_sum(int n, double d) {
  const double e = decay(d);
  return (1.0 - e) * (1.0 - e) / (1.0 + (n - 1) * std::exp(-d));
}

inline double alpha(int n, double d, bool diagonal) {
  const double e = decay(d);
  const double base = gamma(n, d) / std::sqrt(double(n));
  return diagonal ? std::sqrt(1.0 - e) * base : std::sqrt((1.0 - e) * std::exp(-d)) * base;
}

/// S'_s = sum_j conj(b_nj) c_sj; with b_n = 1 this is sum_j c_sj.
inline Complex phased_sum(const CMatrix& phases, const CMatrix& coeffs, int n, int s) {
  Complex acc = 0.0;
  for (Index j = 0; j < coeffs.cols(); ++j) acc += std::conj(phases(n - 1, j)) * coeffs(s - 1, j);
  return acc;
}

/// p~_nm from the full expansion of <v_s, v_s>; the cross term is 2e(1-e)|S'|^2.
inline double full_probability(int n_dim, double d, const InputState& in, const CMatrix& phases, int n) {
  const double e = decay(d);
  const double g2 = gamma(n_dim, d) * gamma(n_dim, d);
  double acc = 0.0;
  for (int s = 1; s <= n_dim; ++s)
    acc += in.weights[static_cast<std::size_t>(s - 1)] * std::norm(phased_sum(phases, in.coeffs, n, s)) *
           (n_dim * e * e + 2.0 * e * (1.0 - e));
  return std::pow(g2 / n_dim, 2) * std::pow(1.0 - e, 2) * (std::pow(1.0 - e, 2) + acc);
}

/// The same quantity with the cross term written as 2 sqrt(N) e (1-e)|S'|^2.
inline double full_probability_sqrt_n(int n_dim, double d, const InputState& in, const CMatrix& phases, int n) {
  const double e = decay(d);
  const double g2 = gamma(n_dim, d) * gamma(n_dim, d);
  double acc = 0.0;
  for (int s = 1; s <= n_dim; ++s)
    acc += in.weights[static_cast<std::size_t>(s - 1)] * std::norm(phased_sum(phases, in.coeffs, n, s)) *
           (n_dim * e * e + 2.0 * std::sqrt(double(n_dim)) * e * (1.0 - e));
  return std::pow(g2 / n_dim, 2) * std::pow(1.0 - e, 2) * (std::pow(1.0 - e, 2) + acc);
}

inline double eq41_bound(int n, double d) {
  return decay(d) * (14.0 / (n * n) + 2.0 + 2.0 / std::sqrt(double(n)));
}

/// 2e/(1-e)^power (N^2 + N sqrt N + N).
inline double eq40_bound(int n, double d, int power) {
  const double e = decay(d);
  return 2.0 * e / std::pow(1.0 - e, power) * (n * n + n * std::sqrt(double(n)) + n);
}

}  // namespace closed_form

/// alpha_jk = <exp0 (x) eta~, V(|exp(aK1g_j) - exp0> (x) |exp(aK1g_k)>)>.
inline LemmaReport check_lemma_alpha(const TeleportModel& model, double tol = kIdentityTol) {
  LemmaReport r{"alpha", model.n_dim(), model.density()};
  const TensorCombo2 bra = tensor(model.vacuum(), model.eta_tilde());
  for (int j = 1; j <= model.n_dim(); ++j) {
    for (int k = 1; k <= model.n_dim(); ++k) {
      const TensorCombo2 ket = exchange(tensor(model.shifted(1, j), model.coherent(1, k)));
      r.computed.push_back(combo_inner(bra, ket));
      r.closed_form.push_back(closed_form::alpha(model.n_dim(), model.density(), j == k));
    }
  }
  r.tolerance = tol;
  r.finish();
  return r;
}

/// beta_s (taken with B_n = 1) against its closed form, one entry per s: the
/// computed side is the norm of the difference, the closed side 0.
inline LemmaReport check_lemma_beta(const TeleportModel& model, const InputState& input, int m,
                                    double tol = kIdentityTol) {
  LemmaReport r{"beta", model.n_dim(), model.density()};
  const auto in = build_input(model, input);
  const int nn = model.n_dim();
  const CoherentCombo eta_t = model.eta_tilde();
  const CoherentCombo vac = model.vacuum();
  const double e = closed_form::decay(model.density());
  const double g2 = model.gamma() * model.gamma();
  for (int s = 1; s <= nn; ++s) {
    TensorCombo3 x = tensor(in.psi[static_cast<std::size_t>(s - 1)], eta_t, vac);
    x = exchange_factors<1>(x);
    x = model.shift_op(m, true).on_factor<1>(x);
    x = second_quantize_factor<2>(model.pair().t, x);
    x = exchange_factors<0>(x);
    x = project_factor<0>(x, vac);
    x = project_factor<1>(x, eta_t);

    CoherentCombo bob;
    for (int j = 1; j <= nn; ++j) {
      const Complex c = input.coeffs(s - 1, j - 1);
      bob += ((1.0 - e) * c) * model.coherent(2, cyclic_shift(j, m, nn));
      for (int k = 1; k <= nn; ++k) bob += (e * c) * model.coherent(2, k);
    }
    const TensorCombo3 expected = (g2 / nn * std::sqrt(1.0 - e)) * tensor(vac, eta_t, bob);
    r.computed.push_back(combo_distance(x, expected));
    r.closed_form.push_back(0.0);
  }
  r.tolerance = tol;
  r.finish();
  return r;
}

/// W_nm(Psi_s (x) eta~ (x) exp0) = g2/N (1-e) exp0 (x) eta~ (x)
///   Gamma(T)U_m [(1-e) B_n* Psi_s + e S'_s sqrt(N) Psi_0], per s.
inline CoherentCombo staged_bob_closed_form(const TeleportModel& model, const InputVectors& in,
                                            const InputState& input, int n, int m, int s) {
  const int nn = model.n_dim();
  const double e = closed_form::decay(model.density());
  const Complex sp = closed_form::phased_sum(model.phases(), input.coeffs, n, s);
  const CoherentCombo rotated = model.phase_op(n, true)(in.psi[static_cast<std::size_t>(s - 1)]);
  CoherentCombo v = (1.0 - e) * rotated + (e * sp * std::sqrt(double(nn))) * in.psi0;
  return second_quantize(model.pair().t, model.shift_op(m)(v));
}

inline LemmaReport check_staged_vector(const TeleportModel& model, const InputState& input, int n, int m,
                                       double tol = kIdentityTol) {
  LemmaReport r{"staged_vector", model.n_dim(), model.density()};
  const auto in = build_input(model, input);
  const auto staged = staged_procedure(model, input, n, m, false);
  const double e = closed_form::decay(model.density());
  const double g2 = model.gamma() * model.gamma();
  for (int s = 1; s <= model.n_dim(); ++s) {
    const TensorCombo3 expected =
        (g2 / model.n_dim() * (1.0 - e)) *
        tensor(model.vacuum(), model.eta_tilde(), staged_bob_closed_form(model, in, input, n, m, s));
    r.computed.push_back(combo_distance(staged.final_vectors[static_cast<std::size_t>(s - 1)], expected));
    r.closed_form.push_back(0.0);
  }
  r.tolerance = tol;
  r.finish();
  return r;
}

struct ThetaCheck {
  LemmaReport vartheta;
  LemmaReport z_bound;
};

/// vartheta_s(A) by partial trace versus its four-term expansion, and
/// Z_s(A) against its bound, for the operators in `ops` (coordinates in the
/// basis returned by embedding Bob's output together with K Psi_s, K Psi_0).
inline ThetaCheck check_lemma_vartheta(const TeleportModel& model, const InputState& input, int n, int m,
                                       int samples, std::uint64_t seed, double tol = kIdentityTol) {
  const int nn = model.n_dim();
  const auto in = build_input(model, input);
  const auto staged = staged_procedure(model, input, n, m, false);
  const double e = closed_form::decay(model.density());
  const double g2 = model.gamma() * model.gamma();
  const double p = closed_form::full_probability(nn, model.density(), input, model.phases(), n);

  std::vector<ExpOperator<1>> parts;
  std::vector<CoherentCombo> extra;
  for (int s = 1; s <= nn; ++s) {
    ExpOperator<3> one;
    const auto& w = staged.final_vectors[static_cast<std::size_t>(s - 1)];
    one.add_outer(1.0, w, w);
    parts.push_back(partial_trace_12(one));
    extra.push_back(model.keyed(in.psi[static_cast<std::size_t>(s - 1)], n, m));
  }
  extra.push_back(second_quantize(model.pair().t, model.shift_op(m)(in.psi0)));
  const auto dense_parts = embed_common<1>(parts, false, extra);
  const auto& basis_ref = dense_parts.front();

  std::vector<CVector> k_psi;
  for (const auto& x : extra) k_psi.push_back(coordinates(basis_ref, x));
  const CVector& k0 = k_psi.back();

  Rng rng(seed);
  const Index dim = basis_ref.dim();
  std::vector<CMatrix> ops{CMatrix::Identity(dim, dim)};
  for (int i = 0; i < samples; ++i) ops.push_back(hermitian_contraction(dim, rng));

  ThetaCheck out{LemmaReport{"vartheta", nn, model.density()}, LemmaReport{"Z_bound", nn, model.density()}};
  double worst_z = 0.0;
  for (const auto& a : ops) {
    for (int s = 1; s <= nn; ++s) {
      const CMatrix& bob = dense_parts[static_cast<std::size_t>(s - 1)].matrix;
      const Complex direct = (bob * a).trace();
      const CVector& ks = k_psi[static_cast<std::size_t>(s - 1)];
      const Complex sp = closed_form::phased_sum(model.phases(), input.coeffs, n, s);
      const double sn = std::sqrt(double(nn));
      const Complex expansion =
          std::pow(g2 / nn, 2) * std::pow(1.0 - e, 2) *
          (std::pow(1.0 - e, 2) * ks.dot(a * ks) + e * (1.0 - e) * sp * sn * ks.dot(a * k0) +
           e * (1.0 - e) * std::conj(sp) * sn * k0.dot(a * ks) + e * e * std::norm(sp) * double(nn) * k0.dot(a * k0));
      out.vartheta.computed.push_back(direct);
      out.vartheta.closed_form.push_back(expansion);
      worst_z = std::max(worst_z, std::abs(direct / p - ks.dot(a * ks)));
    }
  }
  out.vartheta.tolerance = tol;
  out.vartheta.finish();
  const double bound = closed_form::eq40_bound(nn, model.density(), 2);
  out.z_bound.computed.push_back(worst_z);
  out.z_bound.closed_form.push_back(bound);
  out.z_bound.abs_error = worst_z;
  out.z_bound.tolerance = bound;
  out.z_bound.passed = worst_z <= bound;
  return out;
}

/// Aggregate half-perfect probability, p~ closed form for Theta~ (with the
/// 2 sqrt(N) cross-term variant as an informational row), and the
/// |p~ - 1/N^2| envelope.
inline std::vector<LemmaReport> check_probability_formulas(const TeleportModel& model, const InputState& input,
                                                           double tol = kIdentityTol) {
  const int nn = model.n_dim();
  const double d = model.density();
  LemmaReport sum35{"eq35_half_sum", nn, d};
  LemmaReport pt{"p_tilde_closed_form", nn, d};
  LemmaReport sqrt_n{"p_tilde_sqrt_n_cross_term", nn, d};
  sqrt_n.gating = false;
  LemmaReport env{"eq41_envelope", nn, d};

  double total = 0.0;
  double worst41 = 0.0;
  for (int n = 1; n <= nn; ++n) {
    for (int m = 1; m <= nn; ++m) {
      total += channel_half(model, input, n, m).probability;
      const double p = channel_full(model, input, n, m).probability;
      pt.computed.push_back(p);
      pt.closed_form.push_back(closed_form::full_probability(nn, d, input, model.phases(), n));
      sqrt_n.computed.push_back(p);
      sqrt_n.closed_form.push_back(closed_form::full_probability_sqrt_n(nn, d, input, model.phases(), n));
      worst41 = std::max(worst41, std::abs(p - 1.0 / (nn * nn)));
    }
  }
  sum35.computed.push_back(total);
  sum35.closed_form.push_back(closed_form::half_sum(nn, d));
  sum35.tolerance = tol;
  sum35.finish();
  pt.tolerance = tol;
  pt.finish();
  sqrt_n.tolerance = tol;
  sqrt_n.finish();
  env.computed.push_back(worst41);
  env.closed_form.push_back(closed_form::eq41_bound(nn, d));
  env.abs_error = worst41;
  env.tolerance = closed_form::eq41_bound(nn, d);
  env.passed = worst41 <= env.tolerance;
  return {sum35, pt, sqrt_n, env};
}

struct BoundCheck {
  int n = 0, m = 0;
  /// max |tr((Theta~ - Lambda) A)| over the sampled operators.
  double measured = 0.0;
  /// sup over all contractions, i.e. the trace norm of the difference.
  double trace_norm = 0.0;
  /// |tr(Theta~ - Lambda)|, zero for two states.
  double identity_difference = 0.0;
  double bound_squared = 0.0;
  double bound_first = 0.0;
  double probability = 0.0;
  double fidelity = 0.0;
  double measured_eq41 = 0.0;
  double bound_eq41 = 0.0;
};

/// One outcome: seeded Hermitian contractions plus rank-one projectors onto
/// the orthonormal basis of Bob's subspace, and A = 1.
inline BoundCheck check_outcome_bounds(const TeleportModel& model, const InputState& input, int n, int m,
                                       int samples, std::uint64_t seed) {
  const int nn = model.n_dim();
  const double d = model.density();
  const auto full = channel_full(model, input, n, m);
  const auto lam = channel_perfect(model, input, n, m);
  const auto states = embed_common<1>({full.state, lam.state});
  const CMatrix diff = states[0].matrix - states[1].matrix;
  const Index dim = diff.rows();

  BoundCheck b;
  b.n = n;
  b.m = m;
  b.probability = full.probability;
  b.fidelity = fidelity(states[0], states[1]);
  b.trace_norm = dense::trace_norm(diff);
  b.identity_difference = std::abs(diff.trace());
  Rng rng(seed);
  std::vector<CMatrix> ops{CMatrix::Identity(dim, dim)};
  for (int i = 0; i < samples; ++i) ops.push_back(hermitian_contraction(dim, rng));
  for (Index k = 0; k < dim; ++k) {
    CMatrix pk = CMatrix::Zero(dim, dim);
    pk(k, k) = 1.0;
    ops.push_back(pk);
  }
  for (const auto& a : ops) b.measured = std::max(b.measured, std::abs((diff * a).trace()));
  b.bound_squared = closed_form::eq40_bound(nn, d, 2);
  b.bound_first = closed_form::eq40_bound(nn, d, 1);
  b.measured_eq41 = std::abs(full.probability - 1.0 / (nn * nn));
  b.bound_eq41 = closed_form::eq41_bound(nn, d);
  return b;
}

inline std::uint64_t grid_seed(std::uint64_t seed, int n_dim, double d, int n, int m) {
  std::uint64_t bits = 0;
  static_assert(sizeof(bits) == sizeof(d));
  std::memcpy(&bits, &d, sizeof(d));
  return derive_seed(seed, {static_cast<std::uint64_t>(n_dim), bits, static_cast<std::uint64_t>(n),
                            static_cast<std::uint64_t>(m)});
}

/// Deviation bound in both denominator readings plus the probability
/// envelope, over every outcome. The first-power reading is informational.
inline std::vector<LemmaReport> check_theorem_bounds(const TeleportModel& model, const InputState& input,
                                                     int samples, std::uint64_t seed) {
  if (samples < 1) throw InvalidDimension("need at least one sampled operator");
  const int nn = model.n_dim();
  const double d = model.density();
  LemmaReport sq{"eq40_squared_denominator", nn, d};
  LemmaReport first{"eq40_first_power_denominator", nn, d};
  first.gating = false;
  LemmaReport env{"eq41_bound", nn, d};
  double worst = 0.0, worst41 = 0.0;
  for (int n = 1; n <= nn; ++n) {
    for (int m = 1; m <= nn; ++m) {
      const auto b = check_outcome_bounds(model, input, n, m, samples, grid_seed(seed, nn, d, n, m));
      worst = std::max(worst, b.measured);
      worst41 = std::max(worst41, b.measured_eq41);
    }
  }
  auto fill = [](LemmaReport& r, double measured, double bound) {
    r.computed = {measured};
    r.closed_form = {bound};
    r.abs_error = measured;
    r.tolerance = bound;
    r.passed = measured <= bound;
  };
  fill(sq, worst, closed_form::eq40_bound(nn, d, 2));
  fill(first, worst, closed_form::eq40_bound(nn, d, 1));
  fill(env, worst41, closed_form::eq41_bound(nn, d));
  return {sq, first, env};
}

struct SlopeReport {
  std::vector<double> densities;
  std::vector<double> deviations;
  double slope = 0.0;
  bool monotone = false;
  bool passed = false;
};

/// Least-squares slope of log(max_nm ||Theta~_nm - Lambda_nm||_1) against d.
inline SlopeReport check_slope(int n_dim, SplittingKind splitting, const InputState& input,
                               const std::vector<double>& densities, double target = -0.5, double rel_tol = 0.25) {
  SlopeReport rep;
  rep.densities = densities;
  for (double d : densities) {
    ModelConfig cfg;
    cfg.n_dim = n_dim;
    cfg.density = d;
    cfg.splitting = splitting;
    const TeleportModel model(cfg);
    double worst = 0.0;
    for (int n = 1; n <= n_dim; ++n) {
      for (int m = 1; m <= n_dim; ++m) {
        const auto states =
            embed_common<1>({channel_full(model, input, n, m).state, channel_perfect(model, input, n, m).state});
        worst = std::max(worst, dense::trace_norm(states[0].matrix - states[1].matrix));
      }
    }
    rep.deviations.push_back(worst);
  }
  rep.monotone = true;
  for (std::size_t i = 1; i < rep.deviations.size(); ++i)
    if (rep.deviations[i] > rep.deviations[i - 1]) rep.monotone = false;
  double mx = 0.0, my = 0.0;
  const double k = static_cast<double>(densities.size());
  for (std::size_t i = 0; i < densities.size(); ++i) {
    mx += densities[i] / k;
    my += std::log(rep.deviations[i]) / k;
  }
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < densities.size(); ++i) {
    sxy += (densities[i] - mx) * (std::log(rep.deviations[i]) - my);
    sxx += (densities[i] - mx) * (densities[i] - mx);
  }
  rep.slope = sxx > 0.0 ? sxy / sxx : 0.0;
  rep.passed = std::abs(rep.slope - target) <= rel_tol * std::abs(target);
  return rep;
}

struct SweepSpec {
  std::vector<int> n_values{2};
  std::vector<double> d_values{1.0, 4.0};
  SplittingKind splitting = SplittingKind::half;
  std::uint64_t seed = 7;
  int samples_a = 20;
  /// Empty: a seeded random input per N.
  std::vector<InputState> inputs;
  CMatrix phase_matrix;
  double tol = kIdentityTol;
  bool allow_large_n = false;

  void validate() const {
    if (n_values.empty() || d_values.empty()) throw ConfigError("sweep needs non-empty N and d lists");
    for (double d : d_values)
      if (!(d >= kMinDensity)) throw ConfigError("densities must be >= " + std::to_string(kMinDensity));
    if (samples_a < 1) throw ConfigError("samples_A must be positive");
  }

  InputState input_for(int n_dim) const {
    for (const auto& in : inputs)
      if (static_cast<int>(in.weights.size()) == n_dim) return in;
    Rng rng(derive_seed(seed, {static_cast<std::uint64_t>(n_dim)}));
    return InputState::random(n_dim, rng);
  }
};

struct RunRecord {
  int n_dim = 0;
  double density = 0.0;
  ChannelKind channel = ChannelKind::perfect;
  int n = 0, m = 0;
  double probability = 0.0;
  double fidelity = 0.0;
  double bound_eq40 = 0.0;
  double measured_eq40 = 0.0;
  double bound_eq41 = 0.0;
  double measured_eq41 = 0.0;
  bool passed = false;
};

struct SweepResult {
  std::vector<RunRecord> records;
  std::vector<LemmaReport> lemmas;

  bool passed() const {
    for (const auto& r : records)
      if (!r.passed) return false;
    return all_passed(lemmas);
  }
};

/// All channel rows and lemma rows for one (N, d) grid point.
///  perfect: eq40 columns hold ||Lambda - keyed target||_1 vs tol, eq41 |p - 1/N^2| vs tol.
///  half:    eq40 columns hold ||Theta - Lambda||_1 vs tol, eq41 |p - half_sum/N^2| vs tol.
///  full:    eq40 columns hold the sampled deviation vs the squared-denominator bound,
///           eq41 |p~ - 1/N^2| vs its envelope.
inline SweepResult run_grid_point(const SweepSpec& spec, int n_dim, double d) {
  ModelConfig cfg;
  cfg.n_dim = n_dim;
  cfg.density = d;
  cfg.splitting = spec.splitting;
  cfg.phase_matrix = spec.phase_matrix;
  cfg.allow_large_n = spec.allow_large_n;
  const TeleportModel model(cfg);
  const InputState input = spec.input_for(n_dim);
  input.validate(n_dim);
  const double tol = spec.tol;

  SweepResult out;
  std::vector<RunRecord> perfect, half, full;
  for (int n = 1; n <= n_dim; ++n) {
    for (int m = 1; m <= n_dim; ++m) {
      const auto lam = channel_perfect(model, input, n, m);
      const auto th = channel_half(model, input, n, m);
      const auto states = embed_common<1>({lam.state, th.state, keyed_target(model, input, n, m)});

      RunRecord r{n_dim, d, ChannelKind::perfect, n, m, lam.probability, fidelity(states[0], states[2])};
      r.bound_eq40 = tol;
      r.measured_eq40 = dense::trace_norm(states[0].matrix - states[2].matrix);
      r.bound_eq41 = tol;
      r.measured_eq41 = std::abs(lam.probability - 1.0 / (n_dim * n_dim));
      r.passed = r.measured_eq40 <= r.bound_eq40 && r.measured_eq41 <= r.bound_eq41;
      perfect.push_back(r);

      RunRecord h{n_dim, d, ChannelKind::half, n, m, th.probability, fidelity(states[1], states[2])};
      h.bound_eq40 = tol;
      h.measured_eq40 = dense::trace_norm(states[1].matrix - states[0].matrix);
      h.bound_eq41 = tol;
      h.measured_eq41 = std::abs(th.probability - closed_form::half_sum(n_dim, d) / (n_dim * n_dim));
      h.passed = h.measured_eq40 <= h.bound_eq40 && h.measured_eq41 <= h.bound_eq41;
      half.push_back(h);

      const auto b = check_outcome_bounds(model, input, n, m, spec.samples_a, grid_seed(spec.seed, n_dim, d, n, m));
      RunRecord f{n_dim, d, ChannelKind::full, n, m, b.probability, b.fidelity};
      f.bound_eq40 = b.bound_squared;
      f.measured_eq40 = b.measured;
      f.bound_eq41 = b.bound_eq41;
      f.measured_eq41 = b.measured_eq41;
      f.passed = f.measured_eq40 <= f.bound_eq40 && f.measured_eq41 <= f.bound_eq41;
      full.push_back(f);
    }
  }
  for (auto* group : {&perfect, &half, &full})
    out.records.insert(out.records.end(), group->begin(), group->end());

  out.lemmas.push_back(check_lemma_alpha(model, tol));
  out.lemmas.push_back(check_lemma_beta(model, input, 1, tol));
  for (auto& r : check_probability_formulas(model, input, tol)) out.lemmas.push_back(std::move(r));
  for (auto& r : check_theorem_bounds(model, input, spec.samples_a, spec.seed)) out.lemmas.push_back(std::move(r));
  return out;
}

/// Grid points run concurrently; results are merged in (N, d) order.
inline SweepResult run_sweep(const SweepSpec& spec) {
  spec.validate();
  for (int n : spec.n_values) {
    if (n < 2) throw ConfigError("N must be >= 2");
    if (n > kMaxDimension && !spec.allow_large_n)
      throw ResourceLimit("N = " + std::to_string(n) + " exceeds the default cap of " + std::to_string(kMaxDimension));
  }
  std::vector<std::future<SweepResult>> jobs;
  for (int n : spec.n_values)
    for (double d : spec.d_values) jobs.push_back(std::async(std::launch::async, run_grid_point, std::cref(spec), n, d));
  SweepResult all;
  for (auto& j : jobs) {
    auto part = j.get();
    all.records.insert(all.records.end(), part.records.begin(), part.records.end());
    all.lemmas.insert(all.lemmas.end(), part.lemmas.begin(), part.lemmas.end());
  }
  return all;
}

inline constexpr const char* kCsvHeader =
    "N,d,channel,n,m,probability,fidelity,bound_eq40,measured_eq40,bound_eq41,measured_eq41,passed";

inline std::string format_double(double x) {
  std::ostringstream os;
  os.precision(17);
  os << x;
  return os.str();
}

inline void write_csv(std::ostream& os, const std::vector<RunRecord>& rows) {
  os << kCsvHeader << '\n';
  for (const auto& r : rows) {
    os << r.n_dim << ',' << format_double(r.density) << ',' << to_string(r.channel) << ',' << r.n << ',' << r.m
       << ',' << format_double(r.probability) << ',' << format_double(r.fidelity) << ','
       << format_double(r.bound_eq40) << ',' << format_double(r.measured_eq40) << ','
       << format_double(r.bound_eq41) << ',' << format_double(r.measured_eq41) << ','
       << (r.passed ? "true" : "false") << '\n';
  }
}

inline void write_lemma_csv(std::ostream& os, const std::vector<LemmaReport>& rows) {
  os << "name,N,d,abs_error,tolerance,passed,gating\n";
  for (const auto& r : rows)
    os << r.name << ',' << r.n_dim << ',' << format_double(r.density) << ',' << format_double(r.abs_error) << ','
       << format_double(r.tolerance) << ',' << (r.passed ? "true" : "false") << ',' << (r.gating ? "true" : "false")
       << '\n';
}

inline nlohmann::json complex_list(const std::vector<Complex>& xs) {
  auto arr = nlohmann::json::array();
  for (const auto& z : xs) arr.push_back({z.real(), z.imag()});
  return arr;
}

inline nlohmann::json to_json(const LemmaReport& r) {
  return {{"name", r.name},         {"N", r.n_dim},
          {"d", r.density},         {"computed", complex_list(r.computed)},
          {"closed_form", complex_list(r.closed_form)},
          {"abs_error", r.abs_error}, {"tolerance", r.tolerance},
          {"passed", r.passed},     {"gating", r.gating}};
}

inline nlohmann::json to_json(const RunRecord& r) {
  return {{"N", r.n_dim},
          {"d", r.density},
          {"channel", to_string(r.channel)},
          {"n", r.n},
          {"m", r.m},
          {"probability", r.probability},
          {"fidelity", r.fidelity},
          {"bound_eq40", r.bound_eq40},
          {"measured_eq40", r.measured_eq40},
          {"bound_eq41", r.bound_eq41},
          {"measured_eq41", r.measured_eq41},
          {"passed", r.passed}};
}

inline nlohmann::json to_json(const SweepResult& s) {
  nlohmann::json out{{"records", nlohmann::json::array()}, {"lemmas", nlohmann::json::array()}};
  for (const auto& r : s.records) out["records"].push_back(to_json(r));
  for (const auto& r : s.lemmas) out["lemmas"].push_back(to_json(r));
  out["passed"] = s.passed();
  return out;
}

}  // namespace cotele
