#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "phylonet/analytics.hpp"
#include "phylonet/model.hpp"
#include "phylonet/rng.hpp"

namespace phylonet {

enum class LineageEnd : std::uint8_t { Death, Mutation, Coalescence };

/// One lineage of a color. Births attach a new lineage to a living one at
/// the birth time; at a coalescence one of the two lineages ends and merges
/// into the other, which continues.
struct Lineage {
  double birth_time = 0.0;
  double end_time = 0.0;
  /// Lineage this one branched off from; nullopt for the root lineage.
  std::optional<std::size_t> parent;
  LineageEnd end = LineageEnd::Death;
  /// Mutation index for LineageEnd::Mutation, target lineage for Coalescence.
  std::size_t end_ref = 0;
  /// Lineages branching off this one, in time order.
  std::vector<std::size_t> branches;
  /// Lineages merging into this one, in time order.
  std::vector<std::size_t> merged_in;

  double length() const { return end_time - birth_time; }
};

struct MutationPoint {
  std::size_t lineage;
  double time;
};

struct FocalPoint {
  std::size_t lineage;
  double time;
};

/// Lineage structure of one color. Times are those of the trajectory.
class ColorNetwork {
 public:
  ColorNetwork() = default;
  ColorNetwork(MarkedTrajectory trajectory, std::vector<Lineage> lineages,
               std::vector<MutationPoint> mutations);

  const MarkedTrajectory& trajectory() const { return trajectory_; }
  const std::vector<Lineage>& lineages() const { return lineages_; }
  const std::vector<MutationPoint>& mutation_points() const { return mutations_; }
  const std::optional<FocalPoint>& focal_point() const { return focal_; }
  void set_focal_point(FocalPoint p) { focal_ = p; }

  double root_time() const { return trajectory_.start_time(); }
  /// Sum of lineage lengths.
  double length() const;
  /// Lineages alive at t (birth <= t < end).
  std::size_t alive_at(double t) const;
  std::vector<std::size_t> alive_lineages_at(double t) const;

 private:
  MarkedTrajectory trajectory_;
  std::vector<Lineage> lineages_;
  std::vector<MutationPoint> mutations_;
  std::optional<FocalPoint> focal_;
};

/// Lineage realization of a marked path starting from one lineage: a Birth
/// splits a uniform living lineage, Death and Mutation end one, Coalescence
/// merges a uniform unordered pair with a fair coin for which one ends.
ColorNetwork realize_network(const MarkedTrajectory& path, RngStream& rng);

/// Decoration with exactly m mutations: a path conditioned on M = m, realized.
ColorNetwork decorate(const ModelParams& params, std::size_t m, RngStream& rng,
                      std::uint64_t max_retries = 10'000'000);

/// Plane tree with vertices numbered in depth-first preorder; root is 0.
class GenealogyTree {
 public:
  GenealogyTree() = default;
  /// From the preorder outdegree sequence (Lukasiewicz code).
  static GenealogyTree from_outdegrees(std::vector<int> outdegrees);

  std::size_t size() const { return outdegree_.size(); }
  std::size_t root() const { return 0; }
  int outdegree(std::size_t v) const { return outdegree_[v]; }
  const std::vector<int>& outdegrees() const { return outdegree_; }
  const std::vector<std::size_t>& children(std::size_t v) const { return children_[v]; }
  /// Parent of v; the root is its own parent.
  std::size_t parent(std::size_t v) const { return parent_[v]; }
  /// Position of v among its parent's children.
  std::size_t child_index(std::size_t v) const { return child_index_[v]; }
  std::size_t depth(std::size_t v) const { return depth_[v]; }
  std::size_t height() const;

 private:
  std::vector<int> outdegree_;
  std::vector<std::vector<std::size_t>> children_;
  std::vector<std::size_t> parent_;
  std::vector<std::size_t> child_index_;
  std::vector<std::size_t> depth_;
};

enum class TreeMethod { Cycle, Rejection };

/// Galton-Watson tree with offspring law `offspring` conditioned on n vertices.
GenealogyTree sample_genealogy_tree(const TiltedOffspring& offspring, std::size_t n, RngStream& rng,
                                    TreeMethod method = TreeMethod::Cycle,
                                    std::uint64_t max_retries = 100'000'000);

/// Point of the glued network: a lineage of a color and an offset from the
/// lineage's birth.
struct PointRef {
  std::size_t vertex = 0;
  std::size_t lineage = 0;
  double offset = 0.0;
};

/// Decorated tree with child roots identified with parent mutation points,
/// plus the induced metric graph. Times are absolute: the root color starts
/// at 0 and each child color starts at its parent mutation time.
class GluedNetwork {
 public:
  const GenealogyTree& tree() const { return tree_; }
  const std::vector<ColorNetwork>& decorations() const { return decorations_; }
  std::size_t colors() const { return decorations_.size(); }
  /// Absolute time of the root of color v.
  double color_root_time(std::size_t v) const { return root_time_[v]; }
  double total_length() const { return total_length_; }

  std::size_t node_count() const { return node_time_.size(); }
  std::size_t edge_count() const { return edge_u_.size(); }
  double node_time(std::size_t node) const { return node_time_[node]; }
  std::size_t edge_u(std::size_t e) const { return edge_u_[e]; }
  std::size_t edge_v(std::size_t e) const { return edge_v_[e]; }
  double edge_weight(std::size_t e) const { return edge_w_[e]; }
  std::size_t root_node() const { return 0; }
  /// Node ids along a lineage in time order, from birth to end.
  const std::vector<std::size_t>& lineage_nodes(std::size_t v, std::size_t lineage) const {
    return lineage_nodes_[v][lineage];
  }
  /// Node of the i-th mutation point of color v.
  std::size_t mutation_node(std::size_t v, std::size_t i) const { return mutation_nodes_[v][i]; }

  /// Absolute time coordinate of a point.
  double height(const PointRef& x) const;
  /// The two graph nodes bracketing x on its lineage.
  std::pair<std::size_t, std::size_t> bracket(const PointRef& x) const;
  /// Distances from x to every node (Dijkstra from the subdivided point).
  std::vector<double> distances_from(const PointRef& x) const;
  /// Point at arc length s in [0, total_length()) along lineages in storage order.
  PointRef locate(double s) const;

  friend GluedNetwork glue(GenealogyTree tree, std::vector<ColorNetwork> decorations);

 private:
  void build_graph();

  GenealogyTree tree_;
  std::vector<ColorNetwork> decorations_;
  std::vector<double> root_time_;
  double total_length_ = 0.0;

  std::vector<double> node_time_;
  std::vector<std::size_t> edge_u_, edge_v_;
  std::vector<double> edge_w_;
  std::vector<std::size_t> adj_offset_;
  std::vector<std::size_t> adj_edge_;
  std::vector<std::vector<std::vector<std::size_t>>> lineage_nodes_;
  std::vector<std::vector<std::size_t>> mutation_nodes_;
  std::vector<double> lineage_cum_;  // cumulative lengths for uniform_point
  std::vector<std::pair<std::size_t, std::size_t>> lineage_index_;
};

/// Throws StructuralError if a decoration's mutation count differs from the
/// outdegree of its vertex.
GluedNetwork glue(GenealogyTree tree, std::vector<ColorNetwork> decorations);

/// Exact sampler of the path from state 1 conditioned on M = m. The excursion
/// from level k down to k-1 is a Geometric number of excursions from k+1 plus
/// a final down-jump; with the per-level pmfs of M this lets every choice be
/// drawn from its conditional law, top down, without rejection. Levels above
/// the state truncation fall back to rejection of single excursions.
class ConditionedExcursions {
 public:
  ConditionedExcursions(const ModelParams& params, int m_max);
  int m_max() const { return m_max_; }
  int levels() const { return n_; }
  /// P(M = m) from state 1 under the state truncation.
  double probability(int m) const;
  MarkedTrajectory sample(int m, RngStream& rng) const;

 private:
  ModelParams params_;
  int n_ = 0;
  int m_max_ = 0;
  // P_[k][j] = P(M_k = j), Q_[k][j] = P(mutations of the up-excursions = j).
  std::vector<std::vector<double>> P_, Q_;
};

/// Precomputed tilt and tilted offspring law for network sampling.
struct NetworkModel {
  ModelParams params;
  TiltSolution tilt;
  TiltedOffspring offspring;
  /// CDF of nu_circ over k = 1, 2, ...
  std::vector<double> nu_cdf;
  /// CDF of the size-biased tilted law i * P(Mhat = i).
  std::vector<double> size_biased_cdf;
  std::shared_ptr<const ConditionedExcursions> excursions;

  static NetworkModel make(const ModelParams& params);
};

/// P(M = m) recovered from the tilted law.
double outdegree_probability(const NetworkModel& model, int m);
enum class DecorateMethod { Auto, Rejection, Exact };
/// Rejection when P(M = m) >= kRejectionFloor, the exact conditioned sampler
/// otherwise (Auto). Rejection alone fails at once with RetryExhausted when
/// P(M = m) < 1e-6.
inline constexpr double kRejectionFloor = 1e-3;
ColorNetwork decorate(const NetworkModel& model, int m, RngStream& rng,
                      DecorateMethod method = DecorateMethod::Auto,
                      std::uint64_t max_retries = 10'000'000);

enum class NetworkMethod { Tilted, Direct };

/// Network conditioned on n colors.
GluedNetwork sample_network(const NetworkModel& model, std::size_t n, RngStream& rng,
                            NetworkMethod method = NetworkMethod::Tilted,
                            std::uint64_t max_retries = 10'000'000);

double distance(const GluedNetwork& g, const PointRef& a, const PointRef& b);
PointRef uniform_point(const GluedNetwork& g, RngStream& rng);

/// Randomized depth-first traversal. Each color is a run of pieces; piece i
/// covers lineage heights [start, end] (absolute times) and is traversed at
/// unit speed in length.
struct ContourPiece {
  double start;
  double end;
};
struct ColorTrace {
  std::size_t vertex;
  double length;
  std::vector<ContourPiece> pieces;
};
/// Colors in depth-first order of the tree, each with its traversal pieces.
std::vector<ColorTrace> trace_contour(const GluedNetwork& g, RngStream& rng);

struct HeightProcess {
  std::vector<double> t;
  std::vector<double> h;
  std::size_t grid_size = 0;
};
/// h_n(t) = d(root, phi_n(t)) on the uniform grid t_i = i / (grid_size - 1).
HeightProcess contour(const GluedNetwork& g, RngStream& rng, std::size_t grid_size = 4096);
/// Height along a trace at traversal time t in [0, 1].
double trace_height(const std::vector<ColorTrace>& trace, double t);

}  // namespace phylonet
