#include <gtest/gtest.h>

#include <cmath>
#include <set>
#include <vector>

#include "phylonet/montecarlo.hpp"
#include "phylonet/rng.hpp"
#include "phylonet/stats.hpp"

using namespace phylonet;

TEST(Rng, SameSeedAndStreamRepeat) {
  RngStream a(7, 3), b(7, 3);
  for (int i = 0; i < 1000; ++i) ASSERT_EQ(a.next_u64(), b.next_u64());
}

TEST(Rng, StreamsDiffer) {
  RngStream a(7, 3), b(7, 4), c(8, 3);
  int same_b = 0, same_c = 0;
  for (int i = 0; i < 1000; ++i) {
    auto x = a.next_u64();
    same_b += x == b.next_u64();
    same_c += x == c.next_u64();
  }
  EXPECT_EQ(same_b, 0);
  EXPECT_EQ(same_c, 0);
}

TEST(Rng, UniformRanges) {
  RngStream r(1, 1);
  for (int i = 0; i < 100000; ++i) {
    double u = r.uniform();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
    double v = r.uniform_pos();
    ASSERT_GT(v, 0.0);
    ASSERT_LE(v, 1.0);
    ASSERT_LT(r.below(7), 7u);
  }
}

TEST(Rng, MomentsWithinFiveSigma) {
  RngStream r(2, 9);
  const int n = 200000;
  MeanAccumulator u, e;
  std::vector<int> counts(5, 0);
  for (int i = 0; i < n; ++i) {
    u.add(r.uniform());
    e.add(r.exponential(2.5));
    ++counts[r.below(5)];
  }
  EXPECT_NEAR(u.mean(), 0.5, 5 * std::sqrt(1.0 / 12 / n));
  EXPECT_NEAR(e.mean(), 0.4, 5 * 0.4 / std::sqrt(n));
  for (int c : counts) EXPECT_NEAR(c, n / 5.0, 5 * std::sqrt(n * 0.2 * 0.8));
}

TEST(Rng, BernoulliEdges) {
  RngStream r(3, 3);
  for (int i = 0; i < 100; ++i) {
    EXPECT_FALSE(r.bernoulli(0.0));
    EXPECT_TRUE(r.bernoulli(1.0));
  }
}

TEST(Rng, SplitIsDeterministicAndDistinct) {
  RngStream r(5, 5);
  RngStream a = r.split(1), b = r.split(1), c = r.split(2);
  EXPECT_EQ(a.next_u64(), b.next_u64());
  EXPECT_NE(a.next_u64(), c.next_u64());
}

TEST(MonteCarlo, ReduceIndependentOfWorkers) {
  auto run = [](unsigned w) {
    McConfig cfg{11, w};
    return mc_reduce<MeanAccumulator>(10000, cfg, 0x77, [](RngStream& rng, std::size_t, std::size_t count) {
      MeanAccumulator a;
      for (std::size_t i = 0; i < count; ++i) a.add(rng.exponential(1.0));
      return a;
    });
  };
  MeanAccumulator one = run(1), four = run(4);
  EXPECT_EQ(one.count(), 10000u);
  EXPECT_EQ(one.mean(), four.mean());
  EXPECT_EQ(one.variance(), four.variance());
}

TEST(MonteCarlo, CollectKeepsOrder) {
  McConfig a{3, 1}, b{3, 3};
  auto f = [](RngStream& rng, std::size_t i) { return static_cast<double>(i) + rng.uniform(); };
  auto x = mc_collect<double>(3000, a, 5, f);
  auto y = mc_collect<double>(3000, b, 5, f);
  ASSERT_EQ(x, y);
  for (std::size_t i = 0; i < x.size(); ++i) ASSERT_EQ(std::floor(x[i]), static_cast<double>(i));
}
