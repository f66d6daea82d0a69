#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "phylonet/errors.hpp"
#include "phylonet/model.hpp"
#include "phylonet/stats.hpp"

using namespace phylonet;

TEST(ModelParams, RejectsNonPositive) {
  EXPECT_THROW(ModelParams(0.0, 1.0, 1.0), std::invalid_argument);
  EXPECT_THROW(ModelParams(1.0, -1.0, 1.0), std::invalid_argument);
  EXPECT_THROW(ModelParams(1.0, 1.0, NAN), std::invalid_argument);
  EXPECT_THROW(rho(ModelParams(1, 1, 1), 0), std::invalid_argument);
}

TEST(ModelParams, Rho) {
  ModelParams p(0.5, 0.25, 0.1);
  EXPECT_DOUBLE_EQ(p.rho(1), 0.6);
  EXPECT_DOUBLE_EQ(p.rho(5), 1.6);
}

TEST(EventCodes, RoundTrip) {
  for (EventKind k : {EventKind::Birth, EventKind::Death, EventKind::Coalescence, EventKind::Mutation})
    EXPECT_EQ(event_from_code(event_code(k)), k);
  EXPECT_EQ(event_code(EventKind::Mutation), 'M');
  EXPECT_THROW(event_from_code('X'), std::invalid_argument);
}

TEST(Trajectory, Invariants) {
  MarkedTrajectory x(1, 0.0,
                     {{0.5, EventKind::Birth}, {1.0, EventKind::Mutation}, {2.0, EventKind::Death}});
  EXPECT_EQ(x.mutation_count(), 1u);
  EXPECT_DOUBLE_EQ(x.duration(), 2.0);
  EXPECT_DOUBLE_EQ(x.length(), 0.5 + 2 * 0.5 + 1.0);
  EXPECT_EQ(x.state_at(0.75), 2);
  EXPECT_EQ(x.state_at(1.0), 1);
  EXPECT_EQ(x.state_at(3.0), 0);
  EXPECT_DOUBLE_EQ(x.integral_until(1.0), 1.5);
  EXPECT_EQ(x.mutation_times(), std::vector<double>{1.0});
  EXPECT_EQ(x.states(), (std::vector<int>{1, 2, 1, 0}));
}

TEST(Trajectory, RejectsBrokenPaths) {
  EXPECT_THROW(MarkedTrajectory(1, 0.0, {}), std::invalid_argument);
  EXPECT_THROW(MarkedTrajectory(1, 0.0, {{1.0, EventKind::Birth}}), std::invalid_argument);
  EXPECT_THROW(MarkedTrajectory(1, 0.0, {{1.0, EventKind::Death}, {2.0, EventKind::Death}}),
               std::invalid_argument);
  EXPECT_THROW(MarkedTrajectory(2, 0.0, {{1.0, EventKind::Death}, {0.5, EventKind::Death}}),
               std::invalid_argument);
  EXPECT_TRUE(MarkedTrajectory().empty());
}

TEST(Simulate, PathsAreValidAndCoalescenceNeedsTwo) {
  ModelParams p(1, 1, 1);
  RngStream rng(1, 1);
  for (int i = 0; i < 2000; ++i) {
    MarkedTrajectory x = simulate_trajectory(p, 1 + i % 3, rng);
    auto s = x.states();
    for (std::size_t j = 0; j < x.events().size(); ++j)
      if (x.events()[j].kind == EventKind::Coalescence) {
        ASSERT_GE(s[j], 2);
      }
    ASSERT_EQ(s.back(), 0);
  }
}

TEST(Simulate, StatsMatchTrajectory) {
  ModelParams p(0.2, 0.2, 0.2);
  RngStream a(5, 5), b(5, 5);
  for (int i = 0; i < 200; ++i) {
    MarkedTrajectory x = simulate_trajectory(p, 1, a);
    TrajectoryStats s = simulate_stats(p, 1, b);
    ASSERT_EQ(x.mutation_count(), s.M);
    ASSERT_NEAR(x.duration(), s.T, 1e-12);
    ASSERT_NEAR(x.length(), s.L, 1e-9);
  }
}

TEST(Simulate, EventCap) {
  RngStream rng(1, 2);
  EXPECT_THROW(simulate_trajectory(ModelParams(0.01, 0.01, 0.01), 50, rng, 5), CapExceeded);
}

TEST(Simulate, MeanMutationsMatchClosedForm) {
  // E[M] = e - 2 for unit rates.
  ModelParams p(1, 1, 1);
  RngStream rng(3, 3);
  MeanAccumulator m;
  for (int i = 0; i < 100000; ++i) m.add(static_cast<double>(simulate_stats(p, 1, rng).M));
  EXPECT_NEAR(m.mean(), std::exp(1.0) - 2.0, 4 * m.std_error());
}

TEST(DownKind, Frequencies) {
  ModelParams p(1.0, 0.5, 2.0);
  RngStream rng(2, 2);
  std::vector<double> c(4, 0.0);
  const int n = 60000;
  for (int i = 0; i < n; ++i) c[static_cast<int>(draw_down_kind(p, 3, rng))] += 1;
  // rho_3 = 4: death 1/4, coalescence 1/4, mutation 1/2.
  EXPECT_EQ(c[0], 0);
  EXPECT_GT(chi2_gof({c[1], c[2], c[3]}, {0.25, 0.25, 0.5}).p_value, 0.001);
  RngStream r1(2, 3);
  for (int i = 0; i < 1000; ++i) ASSERT_NE(draw_down_kind(p, 1, r1), EventKind::Coalescence);
}

TEST(Condition, ExactCount) {
  ModelParams p(1, 1, 1);
  RngStream rng(4, 4);
  for (std::size_t m : {0u, 1u, 3u}) EXPECT_EQ(condition_on_mutations(p, m, rng).mutation_count(), m);
  EXPECT_THROW(condition_on_mutations(p, 40, rng, 100), RetryExhausted);
}

TEST(Paste, ReversesThePast) {
  ModelParams p(1, 1, 1);
  RngStream rng(6, 6);
  // f: 2 -> 3 at 1, -> 2 at 2, -> 1 at 3, -> 0 at 4.
  MarkedTrajectory f(2, 0.0, {{1, EventKind::Birth}, {2, EventKind::Death}, {3, EventKind::Death},
                              {4, EventKind::Mutation}});
  MarkedTrajectory g(1, 0.0, {{0.5, EventKind::Death}});
  MarkedTrajectory x = paste_back_to_back(f, g, p, rng);
  EXPECT_DOUBLE_EQ(x.start_time(), -4.0);
  EXPECT_EQ(x.initial_state(), 1);
  EXPECT_EQ(x.state_at(-3.5), 1);
  EXPECT_EQ(x.state_at(-2.5), 2);
  EXPECT_EQ(x.state_at(-1.5), 3);
  EXPECT_EQ(x.state_at(-0.5), 2);
  EXPECT_EQ(x.state_at(0.0), 1);
  EXPECT_EQ(x.state_at(0.25), 1);
  EXPECT_DOUBLE_EQ(x.end_time(), 0.5);
  // Jump at 0 carries the junction kind.
  bool found = false;
  for (const Event& e : x.events())
    if (e.time == 0.0) found = e.kind == EventKind::Mutation;
  EXPECT_TRUE(found);
  EXPECT_THROW(paste_back_to_back(f, MarkedTrajectory(1, 0.0, {{1, EventKind::Death}}), p, rng,
                                  EventKind::Birth),
               std::invalid_argument);
}

TEST(NuCirc, FrequenciesMatchProducts) {
  ModelParams p(0.2, 0.2, 0.2);
  std::vector<double> w;
  double prod = 1.0, total = 0.0;
  for (int k = 1; k <= 60; ++k) {
    prod /= p.rho(k);
    w.push_back(prod);
    total += prod;
  }
  for (auto& x : w) x /= total;
  RngStream rng(7, 7);
  std::vector<int> draws;
  for (int i = 0; i < 50000; ++i) draws.push_back(sample_nu_circ(p, rng) - 1);
  auto counts = tabulate(draws, 59);
  EXPECT_GT(chi2_gof(counts, w).p_value, 0.001);
}

TEST(XMut, HasMutationAtZero) {
  ModelParams p(1, 1, 1);
  RngStream rng(8, 8);
  for (int i = 0; i < 500; ++i) {
    MarkedTrajectory x = sample_x_mut(p, rng);
    ASSERT_LE(x.start_time(), 0.0);
    ASSERT_GE(x.mutation_count(), 1u);
    bool at_zero = false;
    for (const Event& e : x.events())
      if (e.time == 0.0 && e.kind == EventKind::Mutation) at_zero = true;
    ASSERT_TRUE(at_zero);
  }
}

TEST(Cdf, Sampling) {
  auto cdf = cumulative({0.25, 0.25, 0.5});
  EXPECT_DOUBLE_EQ(cdf.back(), 1.0);
  RngStream rng(9, 9);
  for (int i = 0; i < 1000; ++i) ASSERT_LT(sample_from_cdf(cdf, rng), 3u);
}
