#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "phylonet/errors.hpp"
#include "phylonet/io.hpp"
#include "phylonet/network.hpp"
#include "phylonet/stats.hpp"

using namespace phylonet;

namespace {

const ModelParams kUnit(1, 1, 1);

const NetworkModel& unit_model() {
  static const NetworkModel m = NetworkModel::make(kUnit);
  return m;
}

}  // namespace

TEST(Realize, LineageCountsFollowThePath) {
  RngStream rng(1, 1);
  for (int i = 0; i < 300; ++i) {
    MarkedTrajectory x = simulate_trajectory(kUnit, 1, rng);
    ColorNetwork c = realize_network(x, rng);
    EXPECT_EQ(c.mutation_points().size(), x.mutation_count());
    EXPECT_NEAR(c.length(), x.length(), 1e-9);
    for (const Event& e : x.events()) {
      double t = e.time - 1e-9;
      ASSERT_EQ(static_cast<int>(c.alive_at(t)), x.state_at(t));
    }
  }
}

TEST(Realize, CoalescenceTargetsAreAlive) {
  RngStream rng(2, 2);
  for (int i = 0; i < 300; ++i) {
    ColorNetwork c = realize_network(simulate_trajectory(ModelParams(0.2, 0.2, 0.2), 1, rng), rng);
    const auto& lin = c.lineages();
    for (std::size_t l = 0; l < lin.size(); ++l) {
      if (lin[l].end != LineageEnd::Coalescence) continue;
      const Lineage& t = lin[lin[l].end_ref];
      ASSERT_NE(lin[l].end_ref, l);
      ASSERT_LE(t.birth_time, lin[l].end_time);
      ASSERT_GT(t.end_time, lin[l].end_time);
    }
  }
}

TEST(Tree, Lukasiewicz) {
  GenealogyTree t = GenealogyTree::from_outdegrees({2, 1, 0, 0});
  EXPECT_EQ(t.size(), 4u);
  EXPECT_EQ(t.children(0), (std::vector<std::size_t>{1, 3}));
  EXPECT_EQ(t.parent(2), 1u);
  EXPECT_EQ(t.depth(2), 2u);
  EXPECT_EQ(t.child_index(3), 1u);
  EXPECT_EQ(t.height(), 2u);
  EXPECT_THROW(GenealogyTree::from_outdegrees({2, 0}), std::invalid_argument);
  EXPECT_THROW(GenealogyTree::from_outdegrees({0, 0}), std::invalid_argument);
}

TEST(Tree, SamplersHaveSizeN) {
  RngStream rng(3, 3);
  for (TreeMethod m : {TreeMethod::Cycle, TreeMethod::Rejection})
    for (std::size_t n : {1u, 2u, 7u, 50u}) {
      GenealogyTree t = sample_genealogy_tree(unit_model().offspring, n, rng, m);
      ASSERT_EQ(t.size(), n);
    }
}

TEST(Glue, RejectsMismatchedDecorations) {
  RngStream rng(4, 4);
  GenealogyTree t = GenealogyTree::from_outdegrees({1, 0});
  std::vector<ColorNetwork> d{decorate(kUnit, 0, rng), decorate(kUnit, 0, rng)};
  EXPECT_THROW(glue(t, d), StructuralError);
}

TEST(Network, MetricIdentities) {
  RngStream rng(5, 5);
  GluedNetwork g = sample_network(unit_model(), 40, rng);
  EXPECT_EQ(g.colors(), 40u);
  double sum = 0;
  for (const auto& d : g.decorations()) sum += d.length();
  EXPECT_NEAR(g.total_length(), sum, 1e-12 * sum);
  double edges = 0;
  for (std::size_t e = 0; e < g.edge_count(); ++e) edges += g.edge_weight(e);
  EXPECT_NEAR(edges, sum, 1e-9 * sum);
  PointRef root{0, 0, 0.0};
  for (int i = 0; i < 50; ++i) {
    PointRef x = uniform_point(g, rng);
    EXPECT_NEAR(distance(g, root, x), g.height(x), 1e-9 * (1 + g.height(x)));
    PointRef y = uniform_point(g, rng);
    EXPECT_NEAR(distance(g, x, y), distance(g, y, x), 1e-12);
  }
}

TEST(Network, ChildRootsSitOnParentMutations) {
  RngStream rng(6, 6);
  GluedNetwork g = sample_network(unit_model(), 30, rng);
  for (std::size_t v = 1; v < g.colors(); ++v) {
    std::size_t p = g.tree().parent(v), i = g.tree().child_index(v);
    const MutationPoint& m = g.decorations()[p].mutation_points()[i];
    double abs_time = g.color_root_time(p) + (m.time - g.decorations()[p].root_time());
    EXPECT_NEAR(g.color_root_time(v), abs_time, 1e-12);
    EXPECT_EQ(g.lineage_nodes(v, 0).front(), g.mutation_node(p, i));
  }
}

TEST(Decorate, ExactMatchesRejection) {
  const NetworkModel& m = unit_model();
  RngStream a(7, 1), b(7, 2);
  for (int k : {0, 2, 4}) {
    std::vector<double> da, db;
    for (int i = 0; i < 2000; ++i) {
      ColorNetwork x = decorate(m, k, a, DecorateMethod::Exact);
      ColorNetwork y = decorate(m, k, b, DecorateMethod::Rejection);
      ASSERT_EQ(static_cast<int>(x.mutation_points().size()), k);
      ASSERT_EQ(static_cast<int>(y.mutation_points().size()), k);
      da.push_back(x.trajectory().duration());
      db.push_back(y.trajectory().duration());
    }
    EXPECT_GT(ks_two_sample(da, db).p_value, 0.001) << "m=" << k;
  }
}

TEST(Decorate, RejectionFailsLoudlyForRareCounts) {
  RngStream rng(8, 8);
  EXPECT_LT(outdegree_probability(unit_model(), 13), 1e-6);
  EXPECT_THROW(decorate(unit_model(), 13, rng, DecorateMethod::Rejection), RetryExhausted);
  EXPECT_EQ(decorate(unit_model(), 13, rng).mutation_points().size(), 13u);
}

TEST(Excursions, ProbabilitiesMatchOffspringLaw) {
  const NetworkModel& m = unit_model();
  OffspringPmf pmf = offspring_pmf(kUnit, 20);
  for (int k = 0; k <= 20; ++k) EXPECT_NEAR(m.excursions->probability(k), pmf.probs[k], 1e-12);
}

TEST(Contour, StartsAndEndsAtRoot) {
  RngStream rng(9, 9);
  GluedNetwork g = sample_network(unit_model(), 25, rng);
  HeightProcess h = contour(g, rng, 257);
  ASSERT_EQ(h.t.size(), 257u);
  EXPECT_DOUBLE_EQ(h.t.front(), 0.0);
  EXPECT_DOUBLE_EQ(h.t.back(), 1.0);
  EXPECT_NEAR(h.h.front(), 0.0, 1e-12);
  for (double x : h.h) EXPECT_GE(x, -1e-12);
}

TEST(Io, NetworkRoundTrip) {
  RngStream rng(10, 10);
  GluedNetwork g = sample_network(unit_model(), 20, rng);
  io::json j = io::to_json(g);
  GluedNetwork back = io::network_from_json(io::json::parse(j.dump()));
  EXPECT_EQ(io::edge_csv(back), io::edge_csv(g));
  EXPECT_EQ(io::to_json(back).dump(), j.dump());
  EXPECT_EQ(io::extended_newick(back), io::extended_newick(g));
}

TEST(Io, TrajectoryRoundTripAndValidation) {
  MarkedTrajectory x(1, 0.0, {{0.5, EventKind::Birth}, {1.0, EventKind::Coalescence}, {2.0, EventKind::Mutation}});
  io::json j = io::to_json(x);
  EXPECT_EQ(j["events"][1][1], "C");
  MarkedTrajectory y = io::trajectory_from_json(j);
  EXPECT_EQ(io::to_json(y), j);
  j["events"][2][1] = "B";
  EXPECT_THROW(io::trajectory_from_json(j), std::invalid_argument);
}

TEST(Io, NewickShape) {
  RngStream rng(11, 11);
  GluedNetwork g = sample_network(unit_model(), 5, rng);
  std::string s = io::extended_newick(g);
  EXPECT_EQ(s.back(), ';');
  int depth = 0;
  for (char c : s) {
    depth += c == '(';
    depth -= c == ')';
    ASSERT_GE(depth, 0);
  }
  EXPECT_EQ(depth, 0);
  // One m<v>_<i> label per tree edge.
  std::size_t labels = 0;
  for (std::size_t p = s.find(")m"); p != std::string::npos; p = s.find(")m", p + 1)) ++labels;
  EXPECT_EQ(labels, g.colors() - 1);
}
