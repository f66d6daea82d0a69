#include <gtest/gtest.h>

#include <cmath>
#include <numeric>
#include <vector>

#include "phylonet/rng.hpp"
#include "phylonet/stats.hpp"

using namespace phylonet;

TEST(MeanAccumulator, MatchesTwoPass) {
  std::vector<double> x{1.5, -2.0, 3.25, 0.0, 7.0, 2.5};
  MeanAccumulator a;
  for (double v : x) a.add(v);
  double m = std::accumulate(x.begin(), x.end(), 0.0) / x.size();
  double ss = 0;
  for (double v : x) ss += (v - m) * (v - m);
  EXPECT_DOUBLE_EQ(a.mean(), m);
  EXPECT_NEAR(a.variance(), ss / (x.size() - 1), 1e-12);
  EXPECT_NEAR(a.std_error(), std::sqrt(ss / (x.size() - 1) / x.size()), 1e-12);
}

TEST(MeanAccumulator, MergeEqualsSequential) {
  MeanAccumulator all, a, b;
  for (int i = 0; i < 10; ++i) {
    double v = std::sin(i);
    all.add(v);
    (i < 4 ? a : b).add(v);
  }
  a.merge(b);
  EXPECT_EQ(a.count(), all.count());
  EXPECT_NEAR(a.mean(), all.mean(), 1e-15);
  EXPECT_NEAR(a.variance(), all.variance(), 1e-14);
}

TEST(RatioAccumulator, ValueAndEss) {
  RatioAccumulator r;
  r.add(2.0, 1.0);
  r.add(6.0, 3.0);
  EXPECT_DOUBLE_EQ(r.value(), 2.0);
  EXPECT_DOUBLE_EQ(r.effective_sample_size(), 16.0 / 10.0);
}

TEST(Chi2, KnownStatistic) {
  // Expected 20 each: (100 + 0 + 100) / 20 = 10 on 2 dof, p = exp(-5).
  TestResult t = chi2_gof({10, 20, 30}, {1.0 / 3, 1.0 / 3, 1.0 / 3});
  EXPECT_NEAR(t.statistic, 10.0, 1e-12);
  EXPECT_EQ(t.dof, 2);
  EXPECT_NEAR(t.p_value, std::exp(-5.0), 1e-10);
}

TEST(Chi2, PoolsSmallBins) {
  TestResult t = chi2_gof({50, 48, 1, 1}, {0.5, 0.49, 0.005, 0.005});
  EXPECT_LE(t.dof, 2);
  EXPECT_GT(t.p_value, 0.01);
}

TEST(Chi2, TwoSampleIdentical) {
  TestResult t = chi2_two_sample({30, 40, 30}, {30, 40, 30});
  EXPECT_NEAR(t.statistic, 0.0, 1e-12);
  EXPECT_NEAR(t.p_value, 1.0, 1e-12);
}

TEST(Ks, KnownStatistic) {
  // Disjoint supports give D = 1.
  TestResult t = ks_two_sample({1, 2, 3, 4, 5}, {6, 7, 8, 9, 10});
  EXPECT_DOUBLE_EQ(t.statistic, 1.0);
  EXPECT_LT(t.p_value, 0.01);
  TestResult u = ks_two_sample({1, 3, 5}, {2, 4, 6});
  EXPECT_NEAR(u.statistic, 1.0 / 3, 1e-15);
}

TEST(Ks, SameLawAccepts) {
  RngStream r(4, 4);
  std::vector<double> a(5000), b(5000);
  for (auto& x : a) x = r.exponential(1.0);
  for (auto& x : b) x = r.exponential(1.0);
  EXPECT_GT(ks_two_sample(a, b).p_value, 0.01);
  for (auto& x : b) x *= 1.2;
  EXPECT_LT(ks_two_sample(a, b).p_value, 0.01);
}

TEST(WeightedGof, UnitWeightsAgreeWithTruth) {
  RngStream r(8, 1);
  std::vector<int> cat;
  std::vector<double> w;
  for (int i = 0; i < 20000; ++i) {
    cat.push_back(r.uniform() < 0.3 ? 0 : 1);
    w.push_back(1.0);
  }
  EXPECT_GT(weighted_gof(cat, w, {0.3, 0.7}).p_value, 0.01);
  EXPECT_LT(weighted_gof(cat, w, {0.4, 0.6}).p_value, 0.01);
}

TEST(WeightedGof, ImportanceWeightsCorrectBias) {
  // Draw from (0.5, 0.5) and reweight to (0.2, 0.8).
  RngStream r(8, 2);
  std::vector<int> cat;
  std::vector<double> w;
  for (int i = 0; i < 20000; ++i) {
    int c = r.uniform() < 0.5 ? 0 : 1;
    cat.push_back(c);
    w.push_back(c == 0 ? 0.4 : 1.6);
  }
  EXPECT_GT(weighted_gof(cat, w, {0.2, 0.8}).p_value, 0.01);
  std::vector<int> cat_b;
  std::vector<double> w_b;
  for (int i = 0; i < 20000; ++i) {
    cat_b.push_back(r.uniform() < 0.2 ? 0 : 1);
    w_b.push_back(1.0);
  }
  EXPECT_GT(weighted_two_sample(cat, w, cat_b, w_b).p_value, 0.01);
}

TEST(Helpers, Tabulate) {
  auto t = tabulate({0, 2, 2, 3});
  ASSERT_EQ(t.size(), 4u);
  EXPECT_EQ(t[0], 1);
  EXPECT_EQ(t[1], 0);
  EXPECT_EQ(t[2], 2);
  EXPECT_EQ(t[3], 1);
}

TEST(Helpers, CompensatedSum) {
  CompensatedSum s;
  s.add(1e16);
  for (int i = 0; i < 1000; ++i) s.add(1.0);
  s.add(-1e16);
  EXPECT_DOUBLE_EQ(s.value(), 1000.0);
}

TEST(Helpers, Intervals) {
  EXPECT_TRUE(within_combined_se(1.0, 0.1, 1.3, 0.1));
  EXPECT_FALSE(within_combined_se(1.0, 0.1, 1.5, 0.1));
  EXPECT_TRUE(intervals_overlap(1.0, 0.1, 1.5, 0.1));
  EXPECT_FALSE(intervals_overlap(1.0, 0.1, 1.7, 0.1));
}
