#include <gtest/gtest.h>

#include "cotele/verify.hpp"

using namespace cotele;

namespace {

TeleportModel make_model(int n, double d, SplittingKind kind = SplittingKind::half) {
  ModelConfig c;
  c.n_dim = n;
  c.density = d;
  c.splitting = kind;
  return TeleportModel(c);
}

InputState seeded_input(int n, std::uint64_t seed = 42) {
  Rng rng(derive_seed(seed, {static_cast<std::uint64_t>(n)}));
  return InputState::random(n, rng);
}

double distance(const ExpOperator<1>& a, const ExpOperator<1>& b) {
  const auto st = embed_common<1>({a, b});
  return trace_distance(st[0], st[1]);
}

double state_fidelity(const ExpOperator<1>& a, const ExpOperator<1>& b) {
  const auto st = embed_common<1>({a, b});
  return fidelity(st[0], st[1]);
}

struct Grid {
  int n;
  double d;
  SplittingKind kind;
};

std::vector<Grid> small_grid() {
  std::vector<Grid> g;
  for (auto kind : {SplittingKind::half, SplittingKind::orthogonal})
    for (int n : {2, 3})
      for (double d : {0.5, 4.0}) g.push_back({n, d, kind});
  return g;
}

}  // namespace

TEST(ModelConfig, Validation) {
  ModelConfig c;
  c.n_dim = 1;
  EXPECT_THROW(c.validate(), InvalidDimension);
  c.n_dim = 9;
  EXPECT_THROW(c.validate(), ResourceLimit);
  c.allow_large_n = true;
  EXPECT_NO_THROW(c.validate());
  c = ModelConfig{};
  c.density = 0.01;
  EXPECT_THROW(c.validate(), InvariantViolation);
  c = ModelConfig{};
  c.phase_matrix = CMatrix::Ones(2, 2);
  EXPECT_THROW(c.validate(), InvariantViolation);
  c.phase_matrix = CMatrix::Ones(3, 3);
  EXPECT_THROW(c.validate(), DimensionMismatch);
}

TEST(ModelConfig, DefaultsToDftPhases) {
  const auto model = make_model(3, 1.0);
  EXPECT_LT((model.phases() - dft_phases(3)).cwiseAbs().maxCoeff(), 1e-15);
  EXPECT_NEAR(model.gamma(), closed_form::gamma(3, 1.0), 1e-15);
  EXPECT_NEAR(model.amplitude(), 1.0, 1e-15);
}

TEST(InputState, Validation) {
  InputState in = InputState::standard(2);
  EXPECT_NO_THROW(in.validate(2));
  EXPECT_THROW(in.validate(3), DimensionMismatch);
  in.weights = {0.7, 0.7};
  EXPECT_THROW(in.validate(2), InvariantViolation);
  in.weights = {1.2, -0.2};
  EXPECT_THROW(in.validate(2), InvariantViolation);
  in = InputState::standard(2);
  in.coeffs(0, 1) = 0.5;
  EXPECT_THROW(in.validate(2), InvariantViolation);
}

TEST(InputState, RandomIsValid) {
  Rng rng(3);
  for (int n = 2; n <= 5; ++n) EXPECT_NO_THROW(InputState::random(n, rng).validate(n));
}

TEST(Inputs, PsiIsOrthonormal) {
  for (const auto& g : small_grid()) {
    const auto model = make_model(g.n, g.d, g.kind);
    const auto input = seeded_input(g.n);
    const auto in = build_input(model, input);
    for (int s = 0; s < g.n; ++s) {
      for (int t = 0; t < g.n; ++t) {
        const Complex v = combo_inner(in.psi[static_cast<std::size_t>(s)], in.psi[static_cast<std::size_t>(t)]);
        EXPECT_NEAR(std::abs(v - (s == t ? 1.0 : 0.0)), 0.0, 1e-12);
      }
      // <Psi_s, Psi_0> = N^{-1/2} sum_k conj(c_sk)
      Complex expected = 0.0;
      for (int k = 0; k < g.n; ++k) expected += std::conj(input.coeffs(s, k));
      expected /= std::sqrt(double(g.n));
      EXPECT_NEAR(std::abs(combo_inner(in.psi[static_cast<std::size_t>(s)], in.psi0) - expected), 0.0, 1e-12);
    }
  }
}

TEST(Resources, AreNormalized) {
  for (const auto& g : small_grid()) {
    const auto model = make_model(g.n, g.d, g.kind);
    EXPECT_NEAR(combo_norm_squared(build_entangled(model, ResourceKind::sigma).vector), 1.0, 1e-12);
    EXPECT_NEAR(combo_norm_squared(build_entangled(model, ResourceKind::sigma_tilde).vector), 1.0, 1e-12);
    EXPECT_NEAR(combo_norm_squared(model.eta_tilde()), 1.0, 1e-12);
  }
}

TEST(Measurements, PerfectFamilyIsOrthonormal) {
  for (const auto& g : small_grid()) {
    const auto model = make_model(g.n, g.d, g.kind);
    const auto fam = build_measurements(model, MeasurementKind::F);
    ASSERT_EQ(fam.vectors.size(), static_cast<std::size_t>(g.n * g.n));
    for (std::size_t a = 0; a < fam.vectors.size(); ++a)
      for (std::size_t b = 0; b < fam.vectors.size(); ++b)
        EXPECT_NEAR(std::abs(combo_inner(fam.vectors[a], fam.vectors[b]) - (a == b ? 1.0 : 0.0)), 0.0, 1e-12);
  }
}

TEST(Measurements, RotatedSigmaGivesPerfectFamily) {
  for (auto kind : {SplittingKind::half, SplittingKind::orthogonal}) {
    const auto model = make_model(3, 1.0, kind);
    const auto fam = build_measurements(model, MeasurementKind::F);
    const auto sigma = build_entangled(model, ResourceKind::sigma);
    for (int n = 1; n <= 3; ++n)
      for (int m = 1; m <= 3; ++m)
        EXPECT_LT(combo_distance(rotate_resource(model, sigma.vector, n, m), fam.at(n, m)), 1e-12);
  }
}

TEST(Measurements, TildeFamilyOverlapShrinksWithDensity) {
  double previous = 2.0;
  for (double d : {0.5, 2.0, 8.0, 16.0}) {
    const auto model = make_model(2, d);
    const auto fam = build_measurements(model, MeasurementKind::F_tilde);
    double worst = 0.0;
    for (std::size_t a = 0; a < fam.vectors.size(); ++a) {
      EXPECT_NEAR(combo_norm_squared(fam.vectors[a]), 1.0, 1e-12);
      for (std::size_t b = 0; b < a; ++b) worst = std::max(worst, std::abs(combo_inner(fam.vectors[a], fam.vectors[b])));
    }
    EXPECT_LT(worst, previous);
    previous = worst;
  }
  EXPECT_LT(previous, 1e-3);
}

TEST(PerfectChannel, UniformProbabilityAndKeyedOutput) {
  for (const auto& g : small_grid()) {
    const auto model = make_model(g.n, g.d, g.kind);
    const auto input = seeded_input(g.n);
    double total = 0.0;
    for (int n = 1; n <= g.n; ++n) {
      for (int m = 1; m <= g.n; ++m) {
        const auto r = channel_perfect(model, input, n, m);
        EXPECT_NEAR(r.probability, 1.0 / (g.n * g.n), 1e-12);
        total += r.probability;
        EXPECT_GE(state_fidelity(r.state, keyed_target(model, input, n, m)), 1.0 - 1e-10);
      }
    }
    EXPECT_NEAR(total, 1.0, 1e-12);
  }
}

TEST(PerfectChannel, DenseReferenceAgrees) {
  Rng rng(9);
  for (int nn : {2, 3, 4}) {
    const CMatrix u = haar_unitary(nn, rng);
    const auto w = simplex_weights(static_cast<std::size_t>(nn), rng);
    CMatrix rho = CMatrix::Zero(nn, nn);
    for (int s = 0; s < nn; ++s) rho += w[static_cast<std::size_t>(s)] * u.col(s) * u.col(s).adjoint();
    for (int n = 1; n <= nn; ++n) {
      for (int m = 1; m <= nn; ++m) {
        const auto r = general_perfect(nn, dft_phases(nn), rho, n, m);
        EXPECT_NEAR(r.probability, 1.0 / (nn * nn), 1e-12);
        const CMatrix expected = r.key * rho * r.key.adjoint();
        EXPECT_LT(dense::trace_distance(r.output, expected), 1e-12);
        EXPECT_TRUE(dense::is_unitary(r.key, 1e-12));
      }
    }
  }
}

TEST(PerfectChannel, DenseReferenceRejectsBadInput) {
  const CMatrix rho = CMatrix::Identity(2, 2) / 2.0;
  EXPECT_THROW(general_perfect(2, dft_phases(2), rho, 0, 1), IndexOutOfRange);
  EXPECT_THROW(general_perfect(2, CMatrix::Ones(2, 2), rho, 1, 1), InvariantViolation);
  EXPECT_THROW(general_perfect(2, dft_phases(2), CMatrix::Identity(2, 2), 1, 1), InvariantViolation);
  EXPECT_THROW(general_perfect(3, dft_phases(3), rho, 1, 1), DimensionMismatch);
}

TEST(HalfChannel, MatchesPerfectState) {
  for (const auto& g : small_grid()) {
    const auto model = make_model(g.n, g.d, g.kind);
    const auto input = seeded_input(g.n);
    double total = 0.0;
    for (int n = 1; n <= g.n; ++n) {
      for (int m = 1; m <= g.n; ++m) {
        const auto th = channel_half(model, input, n, m);
        const auto lam = channel_perfect(model, input, n, m);
        EXPECT_LE(distance(th.state, lam.state), 1e-10);
        EXPECT_NEAR(th.probability, closed_form::half_sum(g.n, g.d) / (g.n * g.n), 1e-12);
        total += th.probability;
      }
    }
    EXPECT_NEAR(total, closed_form::half_sum(g.n, g.d), 1e-10);
  }
}

TEST(HalfChannel, LargeDensitySumApproachesOne) {
  const auto model = make_model(2, 50.0);
  const auto input = seeded_input(2);
  double total = 0.0;
  for (int n = 1; n <= 2; ++n)
    for (int m = 1; m <= 2; ++m) total += channel_half(model, input, n, m).probability;
  EXPECT_GT(total, 1.0 - 1e-8);
}

TEST(FullChannel, ProbabilityClosedForm) {
  for (const auto& g : small_grid()) {
    const auto model = make_model(g.n, g.d, g.kind);
    const auto input = seeded_input(g.n);
    for (int n = 1; n <= g.n; ++n) {
      const double expected = closed_form::full_probability(g.n, g.d, input, model.phases(), n);
      for (int m = 1; m <= g.n; ++m) {
        const double p = channel_full(model, input, n, m).probability;
        EXPECT_NEAR(p, expected, 1e-10);
        EXPECT_LE(std::abs(p - 1.0 / (g.n * g.n)), closed_form::eq41_bound(g.n, g.d));
      }
    }
  }
}

TEST(FullChannel, DeviationBoundSquaredDenominator) {
  for (const auto& g : small_grid()) {
    const auto model = make_model(g.n, g.d, g.kind);
    const auto input = seeded_input(g.n);
    const auto b = check_outcome_bounds(model, input, 1, g.n, 20, 5);
    EXPECT_LE(b.measured, b.bound_squared);
    EXPECT_GE(b.fidelity, 0.0);
    EXPECT_LE(b.fidelity, 1.0 + 1e-12);
  }
}

TEST(OmegaChannel, ReducesToNamedChannels) {
  for (auto kind : {SplittingKind::half, SplittingKind::orthogonal}) {
    const auto model = make_model(2, 1.0, kind);
    const auto input = seeded_input(2);
    const auto s = build_entangled(model, ResourceKind::sigma);
    const auto st = build_entangled(model, ResourceKind::sigma_tilde);
    for (int n = 1; n <= 2; ++n) {
      for (int m = 1; m <= 2; ++m) {
        const std::array<std::pair<ChannelResult, ChannelResult>, 3> cases{{
            {channel_omega(model, input, s, s, n, m), channel_perfect(model, input, n, m)},
            {channel_omega(model, input, s, st, n, m), channel_half(model, input, n, m)},
            {channel_omega(model, input, st, st, n, m), channel_full(model, input, n, m)},
        }};
        for (const auto& [omega, named] : cases) {
          EXPECT_NEAR(omega.probability, named.probability, 1e-12);
          EXPECT_LE(distance(omega.state, named.state), 1e-10);
        }
      }
    }
    EXPECT_THROW(run_channel(ChannelKind::omega, model, input, 1, 1), InvalidDimension);
  }
}

TEST(Channels, IndexChecks) {
  const auto model = make_model(2, 1.0);
  const auto input = seeded_input(2);
  EXPECT_THROW(channel_perfect(model, input, 0, 1), IndexOutOfRange);
  EXPECT_THROW(channel_full(model, input, 1, 3), IndexOutOfRange);
  EXPECT_THROW(channel_half(model, seeded_input(3), 1, 1), DimensionMismatch);
}

TEST(Staged, MatchesFullChannel) {
  for (const auto& g : small_grid()) {
    const auto model = make_model(g.n, g.d, g.kind);
    const auto input = seeded_input(g.n);
    for (int n = 1; n <= g.n; ++n) {
      for (int m = 1; m <= g.n; ++m) {
        const auto staged = staged_procedure(model, input, n, m, false);
        const auto full = channel_full(model, input, n, m);
        EXPECT_NEAR(staged.channel.probability, full.probability, 1e-10);
        EXPECT_LE(distance(staged.channel.state, full.state), 1e-10);
      }
    }
  }
}

TEST(Staged, StepNormsAreRecorded) {
  const auto model = make_model(2, 1.0);
  const auto staged = staged_procedure(model, seeded_input(2), 1, 2, true);
  ASSERT_EQ(staged.steps.size(), 6u);
  // steps 1-3 are unitary on the relevant spans
  for (int k = 0; k <= 3; ++k) EXPECT_NEAR(staged.steps[static_cast<std::size_t>(k)].norm_squared, 1.0, 1e-10);
  EXPECT_NEAR(staged.steps[4].norm_squared, staged.channel.probability, 1e-12);
  EXPECT_NEAR(staged.steps[5].norm_squared, staged.steps[4].norm_squared, 1e-10);
}

TEST(Staged, LargeDensityProductFormAndKeyRecovery) {
  for (auto kind : {SplittingKind::half, SplittingKind::orthogonal}) {
    const auto model = make_model(2, 50.0, kind);
    const auto input = seeded_input(2);
    for (int n = 1; n <= 2; ++n) {
      for (int m = 1; m <= 2; ++m) {
        const auto staged = staged_procedure(model, input, n, m, false);
        auto target = staged_product_target(model, input, n, m);
        const auto st = embed_common<3>({staged.final_state, target});
        EXPECT_LE(trace_distance(st[0], st[1]), 1e-6);

        const auto keyed = staged_procedure(model, input, n, m, true);
        EXPECT_GE(state_fidelity(keyed.channel.state, input_operator(model, input)), 1.0 - 1e-6);
      }
    }
  }
}

TEST(Keyed, TargetIsNormalized) {
  const auto model = make_model(3, 1.0, SplittingKind::orthogonal);
  const auto input = seeded_input(3);
  for (int n = 1; n <= 3; ++n)
    for (int m = 1; m <= 3; ++m) EXPECT_NEAR(keyed_target(model, input, n, m).trace().real(), 1.0, 1e-12);
}
