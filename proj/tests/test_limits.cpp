#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "phylonet/limits.hpp"

using namespace phylonet;

namespace {

const ModelParams kUnit(1, 1, 1);
const ModelParams kFifth(0.2, 0.2, 0.2);

}  // namespace

TEST(ReversalFactor, ProductForm) {
  EXPECT_DOUBLE_EQ(reversal_mark_factor(kUnit, 5, 1.0), 1.0);
  double z = 0.7, expect = 1.0;
  for (int j = 1; j <= 3; ++j) {
    double pj = kFifth.mu / kFifth.rho(j);
    expect *= 1 - pj + pj * z;
  }
  EXPECT_NEAR(reversal_mark_factor(kFifth, 3, z), expect, 1e-15);
}

TEST(ProbN, CriticalEqualsNuCirc) {
  ModelParams p(0.5, 0.5, tune_mu_for_critical(0.5, 0.5));
  NuCircPmf nu = nu_circ_pmf(p);
  ProbNTable t = prob_N_table(p, 1.0);
  for (std::size_t k = 0; k < 10; ++k) EXPECT_NEAR(t.probs[k], nu.probs[k], 1e-12);
}

TEST(ProbN, NormalizedAndFormsDiffer) {
  double zeta = zeta_tilt(kFifth).zeta;
  ProbNTable r = prob_N_table(kFifth, zeta, ProbNForm::Reversed);
  ProbNTable l = prob_N_table(kFifth, zeta, ProbNForm::Literal);
  double sr = 0, sl = 0;
  for (double x : r.probs) sr += x;
  for (double x : l.probs) sl += x;
  EXPECT_NEAR(sr + r.tail_bound, 1.0, 1e-10);
  EXPECT_NEAR(sl + l.tail_bound, 1.0, 1e-10);
  EXPECT_GT(std::abs(r.probs[0] - l.probs[0]), 1e-3);
  EXPECT_NEAR(prob_N(kFifth, zeta, 2), r.probs[1], 1e-14);
}

TEST(SizeProbability, SmallTrees) {
  TiltedOffspring t = make_tilted_offspring(kUnit, zeta_tilt(kUnit));
  const auto& p = t.probs;
  // n = 1: a leaf. n = 2: a path. n = 3: a path or a cherry.
  EXPECT_NEAR(gw_size_probability(t, 1).value, p[0], 1e-14);
  EXPECT_NEAR(gw_size_probability(t, 2).value, p[1] * p[0], 1e-14);
  EXPECT_NEAR(gw_size_probability(t, 3).value, p[1] * p[1] * p[0] + p[2] * p[0] * p[0], 1e-14);
}

TEST(SizeProbability, ApproachesAsymptotic) {
  TiltedOffspring t = make_tilted_offspring(kFifth, zeta_tilt(kFifth));
  double prev = 1.0;
  for (std::size_t n : {250u, 1000u}) {
    SizeProbability s = gw_size_probability(t, n);
    double ratio = s.value / size_asymptotic(t.tilt.sigma_hat_sq, n);
    EXPECT_NEAR(ratio, 1.0, 0.01);
    EXPECT_LT(std::abs(ratio - 1.0), prev);
    prev = std::abs(ratio - 1.0);
    EXPECT_LT(s.error_bar, 1e-6 * s.value);
  }
  EXPECT_NEAR(size_asymptotic(1.0, 1), 1.0 / std::sqrt(2 * M_PI), 1e-15);
}

TEST(CrtConstants, FrozenAndDeterministic) {
  CrtConstants a = crt_constants(kUnit, 20000, McConfig{5, 1});
  CrtConstants b = crt_constants(kUnit, 20000, McConfig{5, 3});
  EXPECT_EQ(a.EUstar.value, b.EUstar.value);
  EXPECT_EQ(a.ell.value, b.ell.value);
  EXPECT_NEAR(a.zeta, 1.468034786539, 1e-9);
  EXPECT_NEAR(a.sigma_hat_sq, 0.97395, 1e-4);
  // Values from an independent 1e6-sample run: EUstar 0.80, ell 0.88.
  EXPECT_NEAR(a.EUstar.value, 0.80, 5 * a.EUstar.std_error + 0.01);
  EXPECT_NEAR(a.ell.value, 0.88, 5 * a.ell.std_error + 0.01);
  EXPECT_NEAR(a.C.value, std::sqrt(a.sigma_hat_sq) / (2 * a.EUstar.value), 1e-12);
  EXPECT_EQ(a.EUstar_literal.flags, std::vector<std::string>{"diagnostic"});
}

TEST(ExcursionOracle, NearSqrtHalfPi) {
  Estimate e = excursion_sup_oracle(20000, 200, McConfig{1, 1});
  EXPECT_NEAR(e.value, std::sqrt(M_PI / 2), 0.1);
}

TEST(LocalBall, Structure) {
  NetworkModel m = NetworkModel::make(kUnit);
  RngStream rng(3, 3);
  for (int i = 0; i < 50; ++i) {
    LocalBall b = sample_local_ball(m, 2, rng);
    ASSERT_FALSE(b.vertices.empty());
    EXPECT_EQ(b.vertices[0].distance, 0);
    EXPECT_EQ(b.vertices[0].spine_index, 0);
    EXPECT_GE(b.N, 1);
    for (const auto& v : b.vertices) {
      EXPECT_LE(v.distance, 2);
      EXPECT_EQ(static_cast<int>(v.decoration.mutation_points().size()), v.outdegree);
    }
  }
}

TEST(FocalNetwork, PointIsAlive) {
  RngStream rng(4, 4);
  double zeta = zeta_tilt(kFifth).zeta;
  for (int i = 0; i < 200; ++i) {
    WeightedColor w = sample_focal_network(kFifth, zeta, rng);
    ASSERT_TRUE(w.network.focal_point().has_value());
    EXPECT_EQ(static_cast<int>(w.network.alive_at(0.0)), w.K);
    WeightedColor s = sample_spinal_network(kFifth, zeta, rng);
    EXPECT_GE(s.network.mutation_points().size(), 1u);
  }
}

TEST(PointView, CountsAliveLineages) {
  NetworkModel m = NetworkModel::make(kUnit);
  RngStream rng(5, 5);
  GluedNetwork g = sample_network(m, 30, rng);
  for (int i = 0; i < 30; ++i) {
    PointRef x = uniform_point(g, rng);
    PointView v = view_from_point(g, x);
    const ColorNetwork& c = g.decorations()[x.vertex];
    double t = c.lineages()[x.lineage].birth_time + x.offset;
    EXPECT_EQ(v.N, static_cast<int>(c.alive_at(t)));
    EXPECT_EQ(v.outdegree, g.tree().outdegree(x.vertex));
    EXPECT_GE(v.since, 0.0);
  }
}
