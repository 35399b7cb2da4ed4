#include <gtest/gtest.h>

#include <numbers>

#include "cotele/models.hpp"

using namespace cotele;

namespace {

ModeVector random_mode(Index dim, Rng& rng, double scale = 0.6) {
  return ModeVector(scale * ginibre(dim, 1, rng).col(0));
}

template <std::size_t A>
ExpCombo<A> random_combo(Index dim, Rng& rng, int terms = 3) {
  ExpCombo<A> x;
  std::normal_distribution<double> normal;
  for (int t = 0; t < terms; ++t) {
    ExpKey<A> key;
    for (auto& k : key) k = random_mode(dim, rng);
    x.add(Complex(normal(rng), normal(rng)), key);
  }
  return x;
}

}  // namespace

TEST(ExpInner, VacuumOverlapIsOne) {
  Rng rng(1);
  const ModeVector g = random_mode(3, rng);
  EXPECT_NEAR(std::abs(exp_inner(ModeVector::zero(3), g) - 1.0), 0.0, 1e-15);
}

TEST(ExpInner, UnitVectorGivesE) {
  const ModeVector g = ModeVector::unit(2, 1);
  EXPECT_NEAR(exp_inner(g, g).real(), std::numbers::e, 1e-12);
}

TEST(ExpInner, DistinctSplitModesAreOrthogonalExponents) {
  for (auto kind : {SplittingKind::half, SplittingKind::orthogonal}) {
    const auto p = make_splitting(kind, 3);
    const double a = std::sqrt(2.0);
    EXPECT_NEAR(std::abs(exp_inner(a * p.k1(p.basis[0]), a * p.k1(p.basis[2])) - 1.0), 0.0, 1e-15);
  }
}

TEST(ExpInner, DimensionMismatchThrows) {
  EXPECT_THROW(exp_inner(ModeVector::zero(2), ModeVector::zero(3)), DimensionMismatch);
}

TEST(ExpInner, HermitianSymmetry) {
  Rng rng(2);
  for (int i = 0; i < 100; ++i) {
    const ModeVector f = random_mode(3, rng), g = random_mode(3, rng);
    EXPECT_NEAR(std::abs(exp_inner(f, g) - std::conj(exp_inner(g, f))), 0.0, 1e-12);
  }
}

TEST(ComboInner, ShiftedVectorsAreOrthogonal) {
  const double d = 1.3;
  const double a = std::sqrt(d);
  const auto p = make_splitting(SplittingKind::orthogonal, 3);
  auto shifted = [&](int j) {
    CoherentCombo x = exp_vector(a * p.k1(p.basis[static_cast<std::size_t>(j)]));
    x.add(-1.0, {ModeVector::zero(p.mode_dim())});
    return x;
  };
  for (int j = 0; j < 3; ++j) {
    for (int k = 0; k < 3; ++k) {
      const Complex v = combo_inner(shifted(j), shifted(k));
      const double expected = j == k ? std::exp(a * a / 2.0) - 1.0 : 0.0;
      EXPECT_NEAR(std::abs(v - expected), 0.0, 1e-12);
    }
  }
}

TEST(ComboInner, SelfInnerIsNonNegative) {
  Rng rng(3);
  for (int i = 0; i < 100; ++i) {
    const auto x = random_combo<1>(2, rng, 4);
    const Complex v = combo_inner(x, x);
    EXPECT_GE(v.real(), -1e-12);
    EXPECT_NEAR(v.imag(), 0.0, 1e-10 * std::max(1.0, std::abs(v)));
  }
}

TEST(ComboInner, SigmaTildeIsNormalized) {
  ModelConfig cfg;
  cfg.n_dim = 2;
  cfg.density = 1.0;
  const TeleportModel model(cfg);
  const auto r = build_entangled(model, ResourceKind::sigma_tilde);
  EXPECT_NEAR(combo_norm_squared(r.vector), 1.0, 1e-12);
}

TEST(Combo, DeduplicatesWithinTolerance) {
  CoherentCombo x;
  CVector v(2);
  v << 0.3, 0.4;
  x.add(1.0, {ModeVector(v)});
  CVector w = v;
  w[0] += 1e-14;
  x.add(2.0, {ModeVector(w)});
  EXPECT_EQ(x.size(), 1u);
  EXPECT_NEAR(std::abs(x.terms()[0].coeff - 3.0), 0.0, 1e-15);
  EXPECT_THROW(x.add(1.0, {ModeVector::zero(3)}), DimensionMismatch);
}

TEST(Combo, NormalizingZeroThrows) {
  CoherentCombo x = vacuum(2);
  x -= vacuum(2);
  EXPECT_TRUE(x.empty() || combo_norm(x) == 0.0);
  EXPECT_THROW(normalized(x), ZeroProbability);
}

TEST(Orthonormalize, ShiftedDictionaryIsDiagonal) {
  const double d = 2.0;
  const auto p = make_splitting(SplittingKind::half, 3);
  std::vector<CoherentCombo> dict;
  for (int j = 0; j < 3; ++j) {
    CoherentCombo x = exp_vector(std::sqrt(d) * p.k1(p.basis[static_cast<std::size_t>(j)]));
    x.add(-1.0, {ModeVector::zero(3)});
    dict.push_back(x);
  }
  const auto b = orthonormalize(dict);
  EXPECT_EQ(b.rank(), 3);
  const CMatrix expected = (std::exp(d / 2.0) - 1.0) * CMatrix::Identity(3, 3);
  EXPECT_LT((b.gram() - expected).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_LT(b.orthonormality_residual(), 1e-10);
}

TEST(Orthonormalize, SingleVacuum) {
  const auto b = orthonormalize(std::vector<ModeVector>{ModeVector::zero(2)});
  EXPECT_EQ(b.rank(), 1);
  EXPECT_NEAR(std::abs(b.transform()(0, 0)), 1.0, 1e-15);
}

TEST(Orthonormalize, DuplicateDropsRank) {
  CVector v(2);
  v << 0.2, -0.1;
  const auto b = orthonormalize(std::vector<ModeVector>{ModeVector(v), ModeVector(v)});
  EXPECT_EQ(b.rank(), 1);
  EXPECT_LT(b.orthonormality_residual(), 1e-10);
}

TEST(Orthonormalize, DegenerateDictionaryThrows) {
  const CoherentCombo zero;
  EXPECT_THROW(orthonormalize(std::vector<CoherentCombo>{zero}), DegenerateDictionary);
}

TEST(Orthonormalize, GramIsPositiveSemidefinite) {
  Rng rng(4);
  for (int i = 0; i < 20; ++i) {
    std::vector<ModeVector> dict;
    for (int k = 0; k < 8; ++k) dict.push_back(random_mode(2, rng));
    const auto b = orthonormalize(dict);
    const Eigen::VectorXd ev = dense::eigenvalues(b.gram());
    EXPECT_GE(ev.minCoeff(), -1e-10 * ev.maxCoeff());
  }
}

TEST(Orthonormalize, EmbeddedCoordinatesReproduceInner) {
  Rng rng(5);
  for (int i = 0; i < 100; ++i) {
    const auto x = random_combo<1>(3, rng), y = random_combo<1>(3, rng);
    ExpOperator<1> holder;
    holder.add_outer(1.0, x, y);
    const auto st = embed(holder, false);
    const CVector cx = coordinates(st, x), cy = coordinates(st, y);
    const Complex expected = combo_inner(x, y);
    EXPECT_NEAR(std::abs(cx.dot(cy) - expected), 0.0, 1e-10 * std::max(1.0, std::abs(expected)));
  }
}

TEST(PartialTrace, ProductInput) {
  Rng rng(6);
  const auto a = random_combo<1>(2, rng), b = random_combo<1>(2, rng), c = random_combo<1>(2, rng);
  ExpOperator<3> op;
  op.add_outer(0.7, tensor(a, b, c), tensor(a, b, c));
  const auto out = partial_trace_12(op);
  ExpOperator<1> expected;
  expected.add_outer(0.7 * combo_norm_squared(a) * combo_norm_squared(b), c, c);
  const auto st = embed_common<1>({out, expected}, false);
  EXPECT_LT(dense::trace_norm(st[0].matrix - st[1].matrix), 1e-10 * st[1].trace());
}

TEST(PartialTrace, PreservesTrace) {
  Rng rng(7);
  for (int i = 0; i < 100; ++i) {
    const auto u = random_combo<3>(2, rng, 3);
    ExpOperator<3> op;
    op.add_outer(1.0, u, u);
    const double full = combo_norm_squared(u);
    const auto out = partial_trace_12(op);
    EXPECT_NEAR(out.trace().real(), full, 1e-10 * std::max(1.0, full));
  }
}

TEST(PartialTrace, ZeroTraceThrows) {
  const auto v = tensor(vacuum(2), vacuum(2), vacuum(2));
  EXPECT_THROW(partial_trace_12(std::vector<WeightedOuter>{{0.0, v, v}}, true), ZeroProbability);
  EXPECT_NO_THROW(partial_trace_12(std::vector<WeightedOuter>{{0.0, v, v}}, false));
}

TEST(PartialTrace, PerfectModelMatchesKeyedTargetOverNSquared) {
  ModelConfig cfg;
  cfg.n_dim = 2;
  cfg.density = 1.0;
  const TeleportModel model(cfg);
  Rng rng(8);
  const InputState input = InputState::random(2, rng);
  const auto in = build_input(model, input);
  const auto fam = build_measurements(model, MeasurementKind::F);
  const auto res = build_entangled(model, ResourceKind::sigma);
  for (int n = 1; n <= 2; ++n) {
    for (int m = 1; m <= 2; ++m) {
      const auto& w = fam.at(n, m);
      std::vector<WeightedOuter> parts;
      for (int s = 0; s < 2; ++s) {
        // (|w><w| (x) 1)(Psi_s (x) r) built term by term, then traced
        const TensorCombo3 full = tensor(in.psi[static_cast<std::size_t>(s)], res.vector);
        const TensorCombo3 ket = tensor(w, contract_12(w, in.psi[static_cast<std::size_t>(s)], res.vector));
        EXPECT_GT(combo_norm(full), 0.0);
        parts.push_back(WeightedOuter{input.weights[static_cast<std::size_t>(s)], ket, ket});
      }
      ExpOperator<3> op;
      for (const auto& p : parts) op.add_outer(p.weight, p.ket, p.bra);
      ExpOperator<1> target = keyed_target(model, input, n, m);
      target *= 0.25;
      const auto st = embed_common<1>({partial_trace_12(op), target}, false);
      EXPECT_LT(dense::trace_norm(st[0].matrix - st[1].matrix), 1e-10);
    }
  }
}
