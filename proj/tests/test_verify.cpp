#include <gtest/gtest.h>

#include <map>
#include <sstream>

#include "cotele/config.hpp"

using namespace cotele;

namespace {

TeleportModel make_model(int n, double d, SplittingKind kind = SplittingKind::half) {
  ModelConfig c;
  c.n_dim = n;
  c.density = d;
  c.splitting = kind;
  return TeleportModel(c);
}

InputState seeded_input(int n, std::uint64_t seed = 7) {
  Rng rng(derive_seed(seed, {static_cast<std::uint64_t>(n)}));
  return InputState::random(n, rng);
}

std::string sweep_csv(const SweepSpec& spec) {
  std::ostringstream os;
  write_csv(os, run_sweep(spec).records);
  return os.str();
}

}  // namespace

TEST(ClosedForm, HalfSumExample) {
  EXPECT_NEAR(closed_form::half_sum(2, 2.0), 0.35195, 5e-6);
  EXPECT_NEAR(closed_form::half_sum(2, 2.0), std::pow(1.0 - std::exp(-1.0), 2) / (1.0 + std::exp(-2.0)), 1e-15);
}

TEST(ClosedForm, GammaLimit) {
  EXPECT_NEAR(closed_form::gamma(3, 50.0), 1.0, 1e-20);
  EXPECT_NEAR(closed_form::gamma(2, std::log(3.0)), std::sqrt(0.75), 1e-15);
}

TEST(LemmaAlpha, MatchesClosedForm) {
  const auto r = check_lemma_alpha(make_model(2, 1.0), 1e-12);
  EXPECT_EQ(r.computed.size(), 4u);
  EXPECT_TRUE(r.passed) << r.abs_error;
  EXPECT_GE(r.abs_error, 0.0);
  for (auto kind : {SplittingKind::half, SplittingKind::orthogonal})
    for (int n : {2, 3})
      for (double d : {0.5, 1.0, 4.0}) EXPECT_TRUE(check_lemma_alpha(make_model(n, d, kind)).passed);
}

TEST(LemmaAlpha, LargeDensityLimit) {
  const auto r = check_lemma_alpha(make_model(2, 50.0));
  EXPECT_TRUE(r.passed);
  EXPECT_NEAR(std::abs(r.computed[0]), 1.0 / std::sqrt(2.0), 1e-9);
  EXPECT_NEAR(std::abs(r.computed[1]), 0.0, 1e-9);
}

TEST(LemmaAlpha, SymmetricOffDiagonal) {
  const auto r = check_lemma_alpha(make_model(3, 1.0));
  for (int j = 0; j < 3; ++j)
    for (int k = 0; k < 3; ++k)
      EXPECT_NEAR(std::abs(r.computed[static_cast<std::size_t>(3 * j + k)] - r.computed[static_cast<std::size_t>(3 * k + j)]),
                  0.0, 1e-12);
}

TEST(LemmaBeta, IdentityAndRandomInputs) {
  const auto model2 = make_model(2, 1.0);
  for (int m = 1; m <= 2; ++m) EXPECT_TRUE(check_lemma_beta(model2, InputState::standard(2), m, 1e-12).passed);
  for (auto kind : {SplittingKind::half, SplittingKind::orthogonal}) {
    const auto model3 = make_model(3, 1.0, kind);
    for (int m = 1; m <= 3; ++m) EXPECT_TRUE(check_lemma_beta(model3, seeded_input(3), m).passed);
  }
}

TEST(StagedVector, MatchesClosedForm) {
  for (int n : {2, 3}) {
    const auto model = make_model(n, 1.0, SplittingKind::orthogonal);
    for (int a = 1; a <= n; ++a)
      for (int b = 1; b <= n; ++b) EXPECT_TRUE(check_staged_vector(model, seeded_input(n), a, b).passed);
  }
}

TEST(LemmaVartheta, ExpansionAndZBound) {
  const auto model = make_model(2, 4.0);
  const auto th = check_lemma_vartheta(model, seeded_input(2), 1, 2, 20, 3);
  EXPECT_TRUE(th.vartheta.passed) << th.vartheta.abs_error;
  EXPECT_TRUE(th.z_bound.passed);
}

TEST(ProbabilityFormulas, RowsAndGating) {
  const auto rows = check_probability_formulas(make_model(2, 2.0), seeded_input(2));
  ASSERT_EQ(rows.size(), 4u);
  std::map<std::string, LemmaReport> by_name;
  for (const auto& r : rows) by_name[r.name] = r;
  EXPECT_TRUE(by_name.at("eq35_half_sum").passed);
  EXPECT_NEAR(by_name.at("eq35_half_sum").computed[0].real(), 0.35195, 5e-6);
  EXPECT_TRUE(by_name.at("p_tilde_closed_form").passed);
  EXPECT_TRUE(by_name.at("eq41_envelope").passed);
  EXPECT_FALSE(by_name.at("p_tilde_sqrt_n_cross_term").gating);
  EXPECT_TRUE(all_passed(rows));
}

TEST(TheoremBounds, PassAtModerateDensity) {
  const auto rows = check_theorem_bounds(make_model(2, 4.0), seeded_input(2), 20, 7);
  ASSERT_EQ(rows.size(), 3u);
  for (const auto& r : rows) {
    if (!r.gating) continue;
    EXPECT_TRUE(r.passed) << r.name;
  }
}

TEST(TheoremBounds, IdentityOperatorGivesZero) {
  const auto b = check_outcome_bounds(make_model(2, 4.0), seeded_input(2), 1, 1, 1, 1);
  EXPECT_NEAR(b.identity_difference, 0.0, 1e-12);
}

TEST(Slope, NearMinusOneHalf) {
  const auto s = check_slope(2, SplittingKind::half, seeded_input(2), {8.0, 16.0, 32.0});
  EXPECT_TRUE(s.monotone);
  EXPECT_TRUE(s.passed) << s.slope;
  EXPECT_NEAR(s.slope, -0.5, 0.125);
}

TEST(LemmaReport, PassedIffWithinTolerance) {
  LemmaReport r{"x", 2, 1.0};
  r.computed = {1.0, Complex(0.0, 1.0)};
  r.closed_form = {1.0, Complex(0.0, 1.0 + 1e-9)};
  r.tolerance = 1e-10;
  r.finish();
  EXPECT_FALSE(r.passed);
  r.tolerance = 1e-8;
  r.finish();
  EXPECT_TRUE(r.passed);
  r.gating = false;
  r.tolerance = 0.0;
  r.finish();
  EXPECT_TRUE(all_passed({r}));
}

TEST(Sweep, RowCountOrderAndDeterminism) {
  SweepSpec spec;
  spec.n_values = {2};
  spec.d_values = {1.0, 4.0};
  spec.seed = 7;
  const auto res = run_sweep(spec);
  EXPECT_EQ(res.records.size(), 2u * (4 + 4 + 4));
  EXPECT_FALSE(res.lemmas.empty());
  EXPECT_TRUE(res.passed());
  for (std::size_t i = 1; i < res.records.size(); ++i) {
    const auto& a = res.records[i - 1];
    const auto& b = res.records[i];
    const auto ka = std::make_tuple(a.n_dim, a.density, static_cast<int>(a.channel), a.n, a.m);
    const auto kb = std::make_tuple(b.n_dim, b.density, static_cast<int>(b.channel), b.n, b.m);
    EXPECT_LT(ka, kb);
  }
  for (const auto& r : res.records) {
    if (r.channel != ChannelKind::perfect) continue;
    EXPECT_NEAR(r.probability, 0.25, 1e-12);
  }
  EXPECT_EQ(sweep_csv(spec), sweep_csv(spec));
}

TEST(Sweep, FullFidelityIncreasesWithDensity) {
  SweepSpec spec;
  spec.n_values = {2};
  spec.d_values = {1.0, 4.0, 8.0};
  const auto res = run_sweep(spec);
  std::map<std::pair<int, int>, double> last;
  for (const auto& r : res.records) {
    if (r.channel != ChannelKind::full) continue;
    const auto key = std::make_pair(r.n, r.m);
    if (last.count(key)) {
      EXPECT_GT(r.fidelity, last[key]);
    }
    last[key] = r.fidelity;
  }
  EXPECT_EQ(last.size(), 4u);
}

TEST(Sweep, CsvHeader) {
  std::ostringstream os;
  write_csv(os, {});
  EXPECT_EQ(os.str(), "N,d,channel,n,m,probability,fidelity,bound_eq40,measured_eq40,bound_eq41,measured_eq41,passed\n");
}

TEST(Sweep, RejectsBadSpecs) {
  SweepSpec spec;
  spec.d_values = {0.01};
  EXPECT_THROW(run_sweep(spec), ConfigError);
  spec = SweepSpec{};
  spec.n_values = {9};
  EXPECT_THROW(run_sweep(spec), ResourceLimit);
  spec.n_values = {};
  EXPECT_THROW(run_sweep(spec), ConfigError);
}

TEST(Sweep, JsonHasAllColumns) {
  SweepSpec spec;
  spec.d_values = {4.0};
  const auto j = to_json(run_sweep(spec));
  ASSERT_FALSE(j["records"].empty());
  for (const char* key : {"N", "d", "channel", "n", "m", "probability", "fidelity", "bound_eq40", "measured_eq40",
                          "bound_eq41", "measured_eq41", "passed"})
    EXPECT_TRUE(j["records"][0].contains(key)) << key;
}

TEST(Config, ParsesAllKeys) {
  const auto c = parse_config_text(R"({
    "n": [2, 3], "d_values": [0.5, 4], "splitting": "orthogonal", "seed": 11, "samples_A": 5,
    "tolerances": {"identity": 1e-9, "oracle": 1e-5, "slope": 0.3}, "output_dir": "out"})");
  EXPECT_EQ(c.n_values, (std::vector<int>{2, 3}));
  EXPECT_EQ(c.d_values, (std::vector<double>{0.5, 4.0}));
  EXPECT_EQ(c.splitting, SplittingKind::orthogonal);
  EXPECT_EQ(c.seed, 11u);
  EXPECT_EQ(c.samples_a, 5);
  EXPECT_DOUBLE_EQ(c.tol.identity, 1e-9);
  EXPECT_DOUBLE_EQ(c.tol.slope, 0.3);
  EXPECT_EQ(c.output_dir, "out");
  EXPECT_NO_THROW(c.validate());
}

TEST(Config, ExplicitInputAndPhases) {
  const auto c = parse_config_text(R"({
    "n": 2, "input": {"weights": [0.25, 0.75], "coeffs": [[1, 0], [0, [0, 1]]]},
    "phase_matrix": [[1, 1], [1, -1]]})");
  EXPECT_FALSE(c.random_input);
  EXPECT_NO_THROW(c.validate());
  EXPECT_NEAR(std::abs(c.input.coeffs(1, 1) - Complex(0.0, 1.0)), 0.0, 1e-15);
  EXPECT_NEAR(c.input_for(2).weights[1], 0.75, 1e-15);
}

TEST(Config, Rejections) {
  EXPECT_THROW(parse_config_text(R"({"n": 2, "colour": 1})"), ConfigError);
  EXPECT_THROW(parse_config_text(R"({"n": "two"})"), ConfigError);
  EXPECT_THROW(parse_config_text(R"({"splitting": "diagonal"})"), ConfigError);
  EXPECT_THROW(parse_config_text(R"({"input": "fixed"})"), ConfigError);
  EXPECT_THROW(parse_config_text(R"({"tolerances": {"speed": 1}})"), ConfigError);
  EXPECT_THROW(parse_config_text("{not json"), ConfigError);
  EXPECT_THROW(parse_config_text(R"({"d_values": [0.01]})").validate(), ConfigError);
  EXPECT_THROW(parse_config_text(R"({"n": 12})").validate(), ConfigError);
  EXPECT_THROW(parse_config_text(R"({"n": 2, "phase_matrix": [[1, 1], [1, 1]]})").validate(), ConfigError);
  EXPECT_THROW(
      parse_config_text(R"({"n": 2, "input": {"weights": [0.5, 0.6], "coeffs": [[1, 0], [0, 1]]}})").validate(),
      ConfigError);
  EXPECT_THROW(load_config("/nonexistent/config.json"), ConfigError);
}
