#pragma once

// Coherent-state teleportation models: input states, entangled resources,
// Alice's measurement families, the channel families Lambda / Theta /
// Theta~ / Omega^{s1 s2}, the staged exchange procedure and the abstract
// finite-dimensional perfect scheme.

#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "cotele/fock_ops.hpp"
#include "cotele/random.hpp"

namespace cotele {

struct ModelConfig {
  int n_dim = 2;
  double density = 1.0;
  SplittingKind splitting = SplittingKind::half;
  /// Empty means the DFT phases b_nj = e^{2 pi i n j / N}.
  CMatrix phase_matrix;
  double tol = kIdentityTol;
  bool allow_large_n = false;

  void validate() const {
    if (n_dim < 2) throw InvalidDimension("models need N >= 2");
    if (n_dim > kMaxDimension && !allow_large_n)
      throw ResourceLimit("N = " + std::to_string(n_dim) + " exceeds the default cap of " +
                          std::to_string(kMaxDimension));
    if (!(density >= kMinDensity) || !std::isfinite(density))
      throw InvariantViolation("density must be finite and >= " + std::to_string(kMinDensity));
    if (phase_matrix.size() != 0) {
      if (phase_matrix.rows() != n_dim || phase_matrix.cols() != n_dim)
        throw DimensionMismatch("phase matrix must be N x N");
      if (!(phase_matrix_residual(phase_matrix) <= kStructureTol))
        throw InvariantViolation("phase matrix needs unimodular entries and orthogonal rows");
    }
  }
};

/// rho = sum_s lambda_s |Psi_s><Psi_s| with Psi_s = sum_j c_sj e_j.
struct InputState {
  std::vector<double> weights;
  CMatrix coeffs;

  void validate(int n) const {
    if (static_cast<int>(weights.size()) != n || coeffs.rows() != n || coeffs.cols() != n)
      throw DimensionMismatch("input state must carry N weights and an N x N coefficient matrix");
    double total = 0.0;
    for (double w : weights) {
      if (!(w >= 0.0)) throw InvariantViolation("input weights must be non-negative");
      total += w;
    }
    if (std::abs(total - 1.0) > 1e-12) throw InvariantViolation("input weights must sum to 1");
    const CMatrix g = coeffs * coeffs.adjoint();
    if ((g - CMatrix::Identity(n, n)).cwiseAbs().maxCoeff() > 1e-12)
      throw InvariantViolation("input coefficient rows must be orthonormal");
  }

  /// c = I, uniform weights.
  static InputState standard(int n) {
    return InputState{std::vector<double>(static_cast<std::size_t>(n), 1.0 / n), CMatrix::Identity(n, n)};
  }

  /// Haar-random rows and simplex-uniform weights.
  static InputState random(int n, Rng& rng) {
    CMatrix c = haar_unitary(n, rng);
    auto w = simplex_weights(static_cast<std::size_t>(n), rng);
    return InputState{std::move(w), std::move(c)};
  }

  /// The pure state |Psi_s><Psi_s| alone.
  InputState pure(int s) const {
    const auto n = coeffs.rows();
    std::vector<double> w(static_cast<std::size_t>(n), 0.0);
    w[static_cast<std::size_t>(s - 1)] = 1.0;
    return InputState{std::move(w), coeffs};
  }
};

enum class ResourceKind { sigma, sigma_tilde };

inline std::string to_string(ResourceKind k) { return k == ResourceKind::sigma ? "sigma" : "sigma_tilde"; }

struct EntangledResource {
  TensorCombo2 vector;
  ResourceKind kind = ResourceKind::sigma;
  /// gamma for sigma_tilde, 1 for sigma.
  double normalizer = 1.0;
};

enum class MeasurementKind { F, F_tilde };

struct MeasurementFamily {
  std::vector<TensorCombo2> vectors;  // row-major over (n, m)
  MeasurementKind kind = MeasurementKind::F;
  int n_dim = 0;

  const TensorCombo2& at(int n, int m) const {
    return vectors[static_cast<std::size_t>((n - 1) * n_dim + (m - 1))];
  }
};

enum class ChannelKind { perfect, half, full, omega };

inline std::string to_string(ChannelKind k) {
  switch (k) {
    case ChannelKind::perfect: return "perfect";
    case ChannelKind::half: return "half";
    case ChannelKind::full: return "full";
    case ChannelKind::omega: return "omega";
  }
  return "?";
}

struct ChannelResult {
  /// Bob's normalized output state, exact.
  ExpOperator<1> state;
  double probability = 0.0;
  bool key_applied = false;

  DenseState<1> dense() const { return embed(state); }
};

/// Input vectors Psi_1..Psi_N and Psi_0 = N^{-1/2} sum_j e_j.
struct InputVectors {
  std::vector<CoherentCombo> psi;
  CoherentCombo psi0;
  std::vector<double> weights;
};

/// The fixed data of one (N, d, splitting, phases) model.
class TeleportModel {
 public:
  explicit TeleportModel(ModelConfig config) : config_(std::move(config)) {
    config_.validate();
    const int n = config_.n_dim;
    pair_ = make_splitting(config_.splitting, n);
    if (config_.phase_matrix.size() == 0) config_.phase_matrix = dft_phases(n);
    amplitude_ = std::sqrt(config_.density);
    gamma_ = std::sqrt(1.0 / (1.0 + (n - 1) * std::exp(-config_.density)));
    for (int j = 1; j <= n; ++j) {
      k1_modes_.push_back(amplitude_ * pair_.k1(g(j)));
      k2_modes_.push_back(amplitude_ * pair_.k2(g(j)));
    }
    for (int i = 1; i <= n; ++i) {
      phase_.push_back(phase_unitary(i, config_.phase_matrix, k1_modes_, false));
      phase_adj_.push_back(phase_unitary(i, config_.phase_matrix, k1_modes_, true));
      shift_.push_back(shift_unitary(i, k1_modes_, false));
      shift_adj_.push_back(shift_unitary(i, k1_modes_, true));
    }
  }

  const ModelConfig& config() const { return config_; }
  const SplittingPair& pair() const { return pair_; }
  int n_dim() const { return config_.n_dim; }
  double density() const { return config_.density; }
  double amplitude() const { return amplitude_; }
  double gamma() const { return gamma_; }
  const CMatrix& phases() const { return config_.phase_matrix; }
  Index mode_dim() const { return pair_.mode_dim(); }

  const ModeVector& g(int j) const { return pair_.basis[index(j)]; }
  /// a K_r g_j.
  const ModeVector& mode(int r, int j) const { return r == 1 ? k1_modes_[index(j)] : k2_modes_[index(j)]; }
  const std::vector<ModeVector>& k1_modes() const { return k1_modes_; }

  CoherentCombo vacuum() const { return cotele::vacuum(mode_dim()); }

  /// |exp(a K_r g_j) - exp(0)>.
  CoherentCombo shifted(int r, int j) const {
    CoherentCombo x = exp_vector(mode(r, j));
    x.add(-1.0, {ModeVector::zero(mode_dim())});
    return normalized(x);
  }

  /// |exp(a K_r g_j)>.
  CoherentCombo coherent(int r, int j) const { return coherent_vector(mode(r, j)); }

  /// |eta> = gamma N^{-1/2} sum_k |exp(a g_k)>.
  CoherentCombo eta() const {
    CoherentCombo x;
    for (int k = 1; k <= n_dim(); ++k) x += coherent_vector(amplitude_ * g(k));
    return (gamma_ / std::sqrt(double(n_dim()))) * x;
  }

  /// |eta~> = Gamma(O_sqrt2 K1)|eta>.
  CoherentCombo eta_tilde() const {
    const ModeOperator op = scaled_multiplication(std::sqrt(2.0), mode_dim()) * pair_.k1;
    return second_quantize(op, eta(), false);
  }

  const DictionaryOperator& phase_op(int n, bool adjoint = false) const {
    check_index(n);
    return adjoint ? phase_adj_[index(n)] : phase_[index(n)];
  }
  const DictionaryOperator& shift_op(int m, bool adjoint = false) const {
    check_index(m);
    return adjoint ? shift_adj_[index(m)] : shift_[index(m)];
  }

  /// Gamma(T) U_m B_n* x, the reconstruction Bob's key undoes.
  CoherentCombo keyed(const CoherentCombo& x, int n, int m) const {
    return second_quantize(pair_.t, shift_op(m)(phase_op(n, true)(x)));
  }

  /// (Gamma(T) U_m B_n*)* x = B_n U_m* Gamma(T*) x.
  CoherentCombo unkeyed(const CoherentCombo& x, int n, int m) const {
    return phase_op(n)(shift_op(m, true)(second_quantize(pair_.t.adjoint(), x)));
  }

  void check_index(int i) const {
    if (i < 1 || i > n_dim()) throw IndexOutOfRange("index " + std::to_string(i) + " outside 1..N");
  }

 private:
  std::size_t index(int j) const {
    if (j < 1 || j > n_dim()) throw IndexOutOfRange("index " + std::to_string(j) + " outside 1..N");
    return static_cast<std::size_t>(j - 1);
  }

  ModelConfig config_;
  SplittingPair pair_;
  double amplitude_ = 0.0;
  double gamma_ = 0.0;
  std::vector<ModeVector> k1_modes_;
  std::vector<ModeVector> k2_modes_;
  std::vector<DictionaryOperator> phase_, phase_adj_, shift_, shift_adj_;
};

inline InputVectors build_input(const TeleportModel& model, const InputState& input) {
  const int n = model.n_dim();
  input.validate(n);
  InputVectors out;
  out.weights = input.weights;
  for (int s = 1; s <= n; ++s) {
    CoherentCombo x;
    for (int j = 1; j <= n; ++j) x += input.coeffs(s - 1, j - 1) * model.shifted(1, j);
    out.psi.push_back(std::move(x));
  }
  for (int j = 1; j <= n; ++j) out.psi0 += model.shifted(1, j);
  out.psi0 = (1.0 / std::sqrt(double(n))) * out.psi0;
  return out;
}

/// sigma: N^{-1/2} sum_k e_k^{(1)} (x) e_k^{(2)};
/// sigma_tilde: nu(eta) = gamma N^{-1/2} sum_k |exp(aK1g_k)> (x) |exp(aK2g_k)>.
inline EntangledResource build_entangled(const TeleportModel& model, ResourceKind kind) {
  const int n = model.n_dim();
  EntangledResource r;
  r.kind = kind;
  if (kind == ResourceKind::sigma) {
    for (int k = 1; k <= n; ++k) r.vector += tensor(model.shifted(1, k), model.shifted(2, k));
    r.vector = (1.0 / std::sqrt(double(n))) * r.vector;
  } else {
    r.vector = beam_split(model.pair(), model.eta());
    r.normalizer = model.gamma();
  }
  return r;
}

/// (B_n (x) U_m Gamma(T*)) applied to a two-factor vector.
inline TensorCombo2 rotate_resource(const TeleportModel& model, const TensorCombo2& x, int n, int m) {
  const TensorCombo2 y = second_quantize_factor<1>(model.pair().t.adjoint(), x);
  const TensorCombo2 z = model.shift_op(m).on_factor<1>(y);
  return model.phase_op(n).on_factor<0>(z);
}

/// F: xi_nm = N^{-1/2} sum_j b_nj e_j (x) e_{j(+)m};
/// F_tilde: xi~_nm = (B_n (x) U_m Gamma(T)*) xi~.
inline MeasurementFamily build_measurements(const TeleportModel& model, MeasurementKind kind) {
  const int n = model.n_dim();
  MeasurementFamily fam;
  fam.kind = kind;
  fam.n_dim = n;
  const TensorCombo2 xi_tilde =
      kind == MeasurementKind::F_tilde ? build_entangled(model, ResourceKind::sigma_tilde).vector : TensorCombo2{};
  for (int bn = 1; bn <= n; ++bn) {
    for (int m = 1; m <= n; ++m) {
      if (kind == MeasurementKind::F) {
        TensorCombo2 v;
        for (int j = 1; j <= n; ++j)
          v += model.phases()(bn - 1, j - 1) * tensor(model.shifted(1, j), model.shifted(1, cyclic_shift(j, m, n)));
        fam.vectors.push_back((1.0 / std::sqrt(double(n))) * v);
      } else {
        fam.vectors.push_back(rotate_resource(model, xi_tilde, bn, m));
      }
    }
  }
  if (kind == MeasurementKind::F) {
    const auto basis = orthonormalize(fam.vectors, kGramCutoff);
    const CMatrix id = CMatrix::Identity(basis.gram().rows(), basis.gram().cols());
    if ((basis.gram() - id).cwiseAbs().maxCoeff() > model.config().tol)
      throw InvariantViolation("F-kind measurement vectors are not orthonormal");
  }
  return fam;
}

namespace detail {

/// tr_12 (F (x) P)(rho (x) |r><r|)(F (x) P) for F = |w><w| and P = F+ or 1,
/// followed by normalization.
inline ChannelResult run_channel(const InputVectors& in, const TensorCombo2& w, const TensorCombo2& r,
                                 bool postselect) {
  ExpOperator<3> projected;
  for (std::size_t s = 0; s < in.psi.size(); ++s) {
    if (in.weights[s] == 0.0) continue;
    CoherentCombo v = contract_12(w, in.psi[s], r);
    if (postselect) v = vacuum_project(v, VacuumPart::plus);
    const TensorCombo3 u = tensor(w, v);
    projected.add_outer(in.weights[s], u, u);
  }
  ChannelResult out;
  out.state = partial_trace_12(projected);
  out.probability = out.state.trace().real();
  if (!(out.probability > kZeroProbability)) throw ZeroProbability("measurement outcome has zero probability");
  out.state *= 1.0 / out.probability;
  return out;
}

}  // namespace detail

/// Lambda_nm: projection F_nm, resource sigma, no post-selection.
inline ChannelResult channel_perfect(const TeleportModel& model, const InputState& input, int n, int m) {
  model.check_index(n);
  model.check_index(m);
  const auto in = build_input(model, input);
  const auto fam = build_measurements(model, MeasurementKind::F);
  const auto res = build_entangled(model, ResourceKind::sigma);
  return detail::run_channel(in, fam.at(n, m), res.vector, false);
}

/// Theta_nm: projection F_nm, resource sigma_tilde, Bob post-selects with F+.
inline ChannelResult channel_half(const TeleportModel& model, const InputState& input, int n, int m) {
  model.check_index(n);
  model.check_index(m);
  const auto in = build_input(model, input);
  const auto fam = build_measurements(model, MeasurementKind::F);
  const auto res = build_entangled(model, ResourceKind::sigma_tilde);
  return detail::run_channel(in, fam.at(n, m), res.vector, true);
}

/// Theta~_nm: projection F~_nm, resource sigma_tilde, Bob post-selects with F+.
inline ChannelResult channel_full(const TeleportModel& model, const InputState& input, int n, int m) {
  model.check_index(n);
  model.check_index(m);
  const auto in = build_input(model, input);
  const auto fam = build_measurements(model, MeasurementKind::F_tilde);
  const auto res = build_entangled(model, ResourceKind::sigma_tilde);
  return detail::run_channel(in, fam.at(n, m), res.vector, true);
}

/// Omega^{s1 s2}_nm: projection (B_n (x) U_m Gamma(T*)) s1 (...)*, resource s2,
/// Bob post-selects with F+.
inline ChannelResult channel_omega(const TeleportModel& model, const InputState& input,
                                   const EntangledResource& sigma1, const EntangledResource& sigma2, int n, int m) {
  model.check_index(n);
  model.check_index(m);
  const auto in = build_input(model, input);
  const TensorCombo2 w = rotate_resource(model, sigma1.vector, n, m);
  return detail::run_channel(in, w, sigma2.vector, true);
}

inline ChannelResult run_channel(ChannelKind kind, const TeleportModel& model, const InputState& input, int n,
                                 int m) {
  switch (kind) {
    case ChannelKind::perfect: return channel_perfect(model, input, n, m);
    case ChannelKind::half: return channel_half(model, input, n, m);
    case ChannelKind::full: return channel_full(model, input, n, m);
    case ChannelKind::omega: break;
  }
  throw InvalidDimension("omega channels need explicit resources");
}

/// Gamma(T) U_m B_n* rho (Gamma(T) U_m B_n*)*.
inline ExpOperator<1> keyed_target(const TeleportModel& model, const InputState& input, int n, int m) {
  const auto in = build_input(model, input);
  std::vector<CoherentCombo> vs;
  for (const auto& p : in.psi) vs.push_back(model.keyed(p, n, m));
  return ExpOperator<1>::mixture(in.weights, vs);
}

/// rho itself as an operator on the Fock space.
inline ExpOperator<1> input_operator(const TeleportModel& model, const InputState& input) {
  const auto in = build_input(model, input);
  return ExpOperator<1>::mixture(in.weights, in.psi);
}

struct StepTrace {
  std::string name;
  /// sum_s lambda_s ||x_s||^2 after the step.
  double norm_squared = 0.0;
};

struct StagedResult {
  ChannelResult channel;
  /// s_fin, normalized.
  ExpOperator<3> final_state;
  /// W_nm (Psi_s (x) eta~ (x) exp(0)) per input component.
  std::vector<TensorCombo3> final_vectors;
  std::vector<StepTrace> steps;
};

/// Runs s_in = rho (x) |eta~><eta~| (x) |exp0><exp0| through
///   1 (x) V,  B_n* (x) U_m* (x) Gamma(T),  V (x) 1,
///   |exp0><exp0| (x) |eta~><eta~| (x) F+,
/// and optionally Bob's key 1 (x) 1 (x) (Gamma(T) U_m B_n*)*.
inline StagedResult staged_procedure(const TeleportModel& model, const InputState& input, int n, int m,
                                     bool apply_key) {
  model.check_index(n);
  model.check_index(m);
  const auto in = build_input(model, input);
  const CoherentCombo eta_t = model.eta_tilde();
  const CoherentCombo vac = model.vacuum();

  std::vector<TensorCombo3> states;
  for (const auto& p : in.psi) states.push_back(tensor(p, eta_t, vac));

  StagedResult out;
  auto record = [&](std::string name) {
    double total = 0.0;
    for (std::size_t s = 0; s < states.size(); ++s) total += in.weights[s] * combo_norm_squared(states[s]);
    out.steps.push_back(StepTrace{std::move(name), total});
  };
  auto apply = [&](auto&& fn) {
    for (auto& x : states) x = fn(x);
  };

  record("step 0: initial state");
  apply([](const TensorCombo3& x) { return exchange_factors<1>(x); });
  record("step 1: 1 (x) V");
  apply([&](const TensorCombo3& x) {
    TensorCombo3 y = model.phase_op(n, true).on_factor<0>(x);
    y = model.shift_op(m, true).on_factor<1>(y);
    return second_quantize_factor<2>(model.pair().t, y);
  });
  record("step 2: B_n* (x) U_m* (x) Gamma(T)");
  apply([](const TensorCombo3& x) { return exchange_factors<0>(x); });
  record("step 3: V (x) 1");
  apply([&](const TensorCombo3& x) {
    TensorCombo3 y = project_factor<0>(x, vac);
    y = project_factor<1>(y, eta_t);
    return vacuum_project_factor<2>(y, VacuumPart::plus);
  });
  record("step 4: |exp0><exp0| (x) |eta~><eta~| (x) F+");
  if (apply_key) {
    apply([&](const TensorCombo3& x) {
      TensorCombo3 y = second_quantize_factor<2>(model.pair().t.adjoint(), x);
      y = model.shift_op(m, true).on_factor<2>(y);
      return model.phase_op(n).on_factor<2>(y);
    });
    record("step 5: 1 (x) 1 (x) (Gamma(T) U_m B_n*)*");
  }

  ExpOperator<3> fin;
  for (std::size_t s = 0; s < states.size(); ++s)
    if (in.weights[s] != 0.0) fin.add_outer(in.weights[s], states[s], states[s]);
  const double p = fin.trace().real();
  if (!(p > kZeroProbability)) throw ZeroProbability("staged procedure outcome has zero probability");
  fin *= 1.0 / p;
  out.channel.state = partial_trace_12(fin);
  out.channel.probability = p;
  out.channel.key_applied = apply_key;
  out.final_state = std::move(fin);
  out.final_vectors = std::move(states);
  return out;
}

/// |exp0><exp0| (x) |eta~><eta~| (x) Lambda_nm(rho).
inline ExpOperator<3> staged_product_target(const TeleportModel& model, const InputState& input, int n, int m) {
  const auto in = build_input(model, input);
  const CoherentCombo eta_t = model.eta_tilde();
  const CoherentCombo vac = model.vacuum();
  std::vector<TensorCombo3> vs;
  for (const auto& p : in.psi) vs.push_back(tensor(vac, eta_t, model.keyed(p, n, m)));
  return ExpOperator<3>::mixture(in.weights, vs);
}

struct DenseChannelResult {
  CMatrix output;
  double probability = 0.0;
  /// W_nm with W_nm xi_j = conj(b_nj) xi_{j(+)m}.
  CMatrix key;
};

namespace detail {

inline CMatrix kron(const CMatrix& a, const CMatrix& b) {
  CMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Index i = 0; i < a.rows(); ++i)
    for (Index j = 0; j < a.cols(); ++j) out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

inline CVector kron(const CVector& a, const CVector& b) {
  CVector out(a.size() * b.size());
  for (Index i = 0; i < a.size(); ++i) out.segment(i * b.size(), b.size()) = a[i] * b;
  return out;
}

}  // namespace detail

/// The perfect scheme on C^N (x) C^N (x) C^N with standard bases: dense
/// projections F_nm = (B_n (x) U_m) sigma_12 (...)*, resource sigma_23, and
/// an explicit partial trace.
inline DenseChannelResult general_perfect(int n_dim, const CMatrix& phases, const CMatrix& rho, int n, int m) {
  if (n_dim < 1) throw InvalidDimension("N must be positive");
  if (n < 1 || n > n_dim || m < 1 || m > n_dim) throw IndexOutOfRange("outcome index outside 1..N");
  if (phases.rows() != n_dim || phases.cols() != n_dim || !(phase_matrix_residual(phases) <= kStructureTol))
    throw InvariantViolation("phase matrix needs unimodular entries and orthogonal rows");
  if (rho.rows() != n_dim || rho.cols() != n_dim) throw DimensionMismatch("density matrix must be N x N");
  if ((rho - rho.adjoint()).cwiseAbs().maxCoeff() > kIdentityTol ||
      std::abs(rho.trace() - Complex(1.0)) > kIdentityTol || dense::eigenvalues(rho).minCoeff() < -kIdentityTol)
    throw InvariantViolation("rho is not a density matrix");

  const Index nn = n_dim;
  CVector xi12 = CVector::Zero(nn * nn);
  for (Index j = 0; j < nn; ++j) xi12[j * nn + j] = 1.0 / std::sqrt(double(nn));
  CMatrix bn = CMatrix::Zero(nn, nn);
  CMatrix um = CMatrix::Zero(nn, nn);
  CMatrix key = CMatrix::Zero(nn, nn);
  for (int j = 1; j <= n_dim; ++j) {
    const int t = cyclic_shift(j, m, n_dim);
    bn(j - 1, j - 1) = phases(n - 1, j - 1);
    um(t - 1, j - 1) = 1.0;
    key(t - 1, j - 1) = std::conj(phases(n - 1, j - 1));
  }
  const CVector xi_nm = detail::kron(bn, um) * xi12;
  const CMatrix f = xi_nm * xi_nm.adjoint();
  const CMatrix sigma23 = xi12 * xi12.adjoint();
  const CMatrix id3 = CMatrix::Identity(nn, nn);
  const CMatrix f3 = detail::kron(f, id3);
  const CMatrix full = f3 * detail::kron(rho, sigma23) * f3.adjoint();

  CMatrix bob = CMatrix::Zero(nn, nn);
  for (Index a = 0; a < nn * nn; ++a) bob += full.block(a * nn, a * nn, nn, nn);
  DenseChannelResult out;
  out.probability = bob.trace().real();
  if (!(out.probability > kZeroProbability)) throw ZeroProbability("outcome has zero probability");
  out.output = bob / out.probability;
  out.key = key;
  return out;
}

}  // namespace cotele
