#include <gtest/gtest.h>

#include <Eigen/Dense>
#include <cmath>
#include <vector>

#include "phylonet/analytics.hpp"
#include "phylonet/errors.hpp"

using namespace phylonet;

namespace {

const ModelParams kUnit(1, 1, 1);
const ModelParams kFifth(0.2, 0.2, 0.2);

// E_k[z^M] for k = 1..K-1 by first-step analysis of the jump chain, cut at
// level K with h_K = 0. Independent of the continued fractions.
Eigen::VectorXd pgf_by_linear_solve(const ModelParams& p, double z, int K = 400) {
  Eigen::MatrixXd A = Eigen::MatrixXd::Identity(K, K);
  Eigen::VectorXd b = Eigen::VectorXd::Zero(K);
  for (int k = 1; k < K; ++k) {
    double r = p.rho(k), up = 1.0 / (1.0 + r), down = r / (1.0 + r);
    double weight = down * (1.0 - p.mu / r + z * p.mu / r);
    if (k + 1 < K) A(k, k + 1) -= up;
    if (k == 1)
      b(k) = weight;
    else
      A(k, k - 1) -= weight;
  }
  A(0, 0) = 1.0;
  return A.partialPivLu().solve(b);
}

}  // namespace

TEST(ExpectedM, ClosedForms) {
  CertifiedValue a = expected_M(kUnit);
  CertifiedValue b = expected_M(kFifth);
  EXPECT_TRUE(a.contains(std::exp(1.0) - 2.0, 1e-12));
  EXPECT_TRUE(b.contains(0.04 * (std::exp(5.0) - 6.0), 1e-10));
  EXPECT_LT(a.width(), 1e-10);
}

TEST(ExpectedM, NonMonotoneInMu) {
  // alpha = beta = 0.2: E[M] rises then falls as mu grows; it tends to 1.
  double small = expected_M(ModelParams(0.2, 0.2, 0.01)).mid();
  double mid = expected_M(ModelParams(0.2, 0.2, 0.1)).mid();
  double large = expected_M(ModelParams(0.2, 0.2, 1.0)).mid();
  EXPECT_LT(small, mid);
  EXPECT_LT(large, mid);
}

TEST(Pgf, AgreesWithLinearSolve) {
  for (const ModelParams& p : {kUnit, kFifth, ModelParams(0.5, 2.0, 0.3)}) {
    for (double z : {0.0, 0.3, 0.7, 1.0}) {
      Eigen::VectorXd h = pgf_by_linear_solve(p, z);
      CertifiedValue g = g_eval(p, z);
      EXPECT_TRUE(g.contains(h(1), 1e-10)) << "z=" << z << " g=" << g.mid() << " oracle=" << h(1);
      CertifiedValue g3 = pgf_from_state(p, 3, z);
      EXPECT_TRUE(g3.contains(h(3), 1e-10));
    }
  }
}

TEST(Convergents, EncloseAndTighten) {
  double prev = 1.0;
  for (int depth = 1; depth <= 12; ++depth) {
    double gap = 0.0;
    for (int i = 0; i <= 10; ++i) {
      Convergents c = g_convergents(kUnit, i / 10.0, depth);
      ASSERT_LE(c.lower, c.upper);
      gap = std::max(gap, c.upper - c.lower);
    }
    EXPECT_LE(gap, convergent_gap_bound(kUnit, depth) * (1 + 1e-12));
    EXPECT_LT(gap, prev);
    prev = gap;
  }
  // prod 1/rho_k for unit rates is 1/(n+1)!.
  EXPECT_NEAR(convergent_gap_bound(kUnit, 4), 1.0 / 120.0, 1e-16);
}

TEST(Convergents, GridMatchesPointwise) {
  std::vector<double> z{0.0, 0.15, 0.5, 0.9, 1.0};
  auto grid = g_convergents_grid(kFifth, z, 25);
  for (std::size_t i = 0; i < z.size(); ++i) {
    Convergents c = g_convergents(kFifth, z[i], 25);
    EXPECT_NEAR(grid[i].lower, c.lower, 1e-14);
    EXPECT_NEAR(grid[i].upper, c.upper, 1e-14);
  }
}

TEST(Convergents, TailClosedForm) {
  double n = 3, r = kUnit.rho(3), z = 0.4;
  double expect = (1 + r - std::sqrt((1 - r) * (1 - r) - 4 * kUnit.mu * (z - 1))) / 2;
  EXPECT_DOUBLE_EQ(g_tail_closed_form(kUnit, static_cast<int>(n), z), expect);
}

TEST(Extinction, Values) {
  CertifiedValue a = extinction_probability(kUnit);
  EXPECT_EQ(a.lower, 1.0);
  EXPECT_EQ(a.upper, 1.0);
  CertifiedValue b = extinction_probability(kFifth);
  EXPECT_NEAR(b.mid(), 0.26541791285, 1e-9);
  Eigen::VectorXd h = pgf_by_linear_solve(kFifth, b.mid());
  EXPECT_NEAR(h(1), b.mid(), 1e-9);
}

TEST(Extinction, SimpleBounds) {
  auto [lo, hi] = simple_pext_bounds(kFifth);
  EXPECT_NEAR(lo, 0.23852, 5e-6);
  EXPECT_NEAR(hi, 0.34, 5e-6);
  auto [lo1, hi1] = simple_pext_bounds(kUnit);
  EXPECT_EQ(lo1, 1.0);
  EXPECT_EQ(hi1, 1.0);
}

TEST(Offspring, PmfMatchesPgf) {
  OffspringPmf pmf = offspring_pmf(kUnit, 40);
  double total = 0.0;
  for (double x : pmf.probs) total += x;
  EXPECT_NEAR(total + pmf.tail_bound, 1.0, 1e-10);
  EXPECT_NEAR(pmf.mean(), std::exp(1.0) - 2.0, 1e-9);
  EXPECT_NEAR(pmf.probs[0], pgf_by_linear_solve(kUnit, 0.0)(1), 1e-12);
}

TEST(Tilt, CriticalAndFrozen) {
  TiltSolution a = zeta_tilt(kUnit);
  EXPECT_NEAR(a.zeta, 1.468034786539, 1e-9);
  EXPECT_NEAR(tilt_phi(kUnit, a.zeta), 1.0, 1e-8);
  TiltSolution b = zeta_tilt(kFifth);
  EXPECT_NEAR(b.zeta, 0.683270317530, 1e-9);
  EXPECT_NEAR(tilt_phi(kFifth, b.zeta), 1.0, 1e-8);
  // E[zeta^M] against the linear-solve oracle.
  EXPECT_NEAR(b.E_zetaM, pgf_by_linear_solve(kFifth, b.zeta)(1), 1e-9);
}

TEST(Tilt, TiltedLawIsCritical) {
  TiltedOffspring t = make_tilted_offspring(kFifth, zeta_tilt(kFifth));
  double mass = 0, mean = 0, second = 0;
  for (std::size_t i = 0; i < t.probs.size(); ++i) {
    mass += t.probs[i];
    mean += i * t.probs[i];
    second += double(i) * i * t.probs[i];
  }
  EXPECT_NEAR(mass + t.tail, 1.0, 1e-10);
  EXPECT_NEAR(mean, 1.0, 1e-8);
  EXPECT_NEAR(second - 1.0, t.tilt.sigma_hat_sq, 1e-6);
}

TEST(Malthusian, SignAndRoot) {
  double a = malthusian(kUnit), b = malthusian(kFifth);
  EXPECT_LT(a, 0.0);
  EXPECT_GT(b, 0.0);
  EXPECT_NEAR(a, -0.42416, 1e-4);
  EXPECT_NEAR(b, 0.29516, 1e-4);
  EXPECT_TRUE(malthusian_psi(kFifth, b).contains(1.0, 1e-8));
  // Psi(0) = E[M].
  EXPECT_TRUE(malthusian_psi(kUnit, 0.0).contains(std::exp(1.0) - 2.0, 1e-10));
}

TEST(Malthusian, LaplaceAtZeroIsOne) {
  EXPECT_TRUE(laplace_f(kUnit, 1, 0.0).contains(1.0, 1e-12));
  EXPECT_TRUE(laplace_f(kUnit, 4, 0.0).contains(1.0, 1e-12));
}

TEST(Critical, TunedMu) {
  double mu = tune_mu_for_critical(0.5, 0.5);
  ModelParams p(0.5, 0.5, mu);
  EXPECT_NEAR(expected_M(p).mid(), 1.0, 1e-10);
  EXPECT_NEAR(zeta_tilt(p).zeta, 1.0, 1e-8);
  EXPECT_NEAR(malthusian(p), 0.0, 1e-8);
}

TEST(NuCirc, NormalizerIsMeanOverMu) {
  NuCircPmf nu = nu_circ_pmf(kFifth);
  EXPECT_NEAR(nu.normalizer, expected_M(kFifth).mid() / kFifth.mu, 1e-9);
  EXPECT_NEAR(nu.probs[0], 1.0 / kFifth.rho(1) / nu.normalizer, 1e-12);
}

TEST(GEval, BeyondOneIsUncertified) {
  CertifiedValue v = g_eval(kUnit, 1.2);
  EXPECT_FALSE(v.certified);
  EXPECT_GT(v.mid(), 1.0);
}
