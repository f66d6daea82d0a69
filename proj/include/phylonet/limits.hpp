#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "phylonet/analytics.hpp"
#include "phylonet/montecarlo.hpp"
#include "phylonet/network.hpp"
#include "phylonet/stats.hpp"

namespace phylonet {

/// Importance weights with Kish effective sample size below this fraction
/// of the sample count are flagged "low_ess".
inline constexpr double kLowEssFraction = 0.05;

/// Constants of the scaling limit. EUstar is estimated two ways:
/// directly as E[sum_{t in mutation times} t zeta^M] / E[zeta^M], and through
/// the nu_circ path decomposition with the past path's marks placed on its
/// reversed jumps. `EUstar_literal` is the decomposition with forward marks
/// on the past path, kept as a diagnostic (it is biased away from zeta = 1).
struct CrtConstants {
  double zeta = 1.0;
  double E_zetaM = 1.0;
  double sigma_hat_sq = 0.0;
  double expected_M = 0.0;
  Estimate EUstar;
  Estimate EUstar_decomposition;
  Estimate EUstar_literal;
  /// E[L zeta^M] / E[zeta^M], weighted and via the mutation-rate change.
  Estimate ell;
  Estimate ell_measure_change;
  /// sigma_hat / (2 EUstar).
  Estimate C;
};
CrtConstants crt_constants(const ModelParams& params, std::size_t n_samples, const McConfig& cfg);

/// prod_{j<=k} (1 - p_j + p_j zeta), p_j = mu / rho_j: the factor by which
/// forward marking of a path from k changes E[zeta^M] relative to marking
/// its reversal.
double reversal_mark_factor(const ModelParams& params, int k, double zeta);

/// P(size = n) of a Galton-Watson tree with the tilted offspring law, by
/// (1/n) P(S_n = -1) with S_n the centered walk.
struct SizeProbability {
  double value = 0.0;
  /// Mass dropped by truncation (pmf tail plus pruned cells), an upper bound
  /// on |value - exact|.
  double error_bar = 0.0;
  bool flagged = false;
};
SizeProbability gw_size_probability(const TiltedOffspring& offspring, std::size_t n,
                                    double tol = 1e-10);
/// n^{-3/2} / sqrt(2 pi sigma^2).
double size_asymptotic(double sigma_sq, std::size_t n);

/// E[sup e] of the normalized Brownian excursion from uniform simple
/// random walk bridges of `steps` steps rotated into excursions.
Estimate excursion_sup_oracle(std::size_t steps, std::size_t replicates, const McConfig& cfg);

/// Scaling checks on sampled G_n.
struct CrtScalingReport {
  std::size_t n = 0;
  std::size_t replicates = 0;
  /// mean |G_n| / n
  Estimate length_per_color;
  /// mean max height / sqrt(n)
  Estimate max_height;
  /// mean of sup_t |h_G(t) - EUstar h_T(c_t)| / sqrt(n)
  Estimate sup_deviation;
  /// mean correlation of h_G and h_T on the contour grid
  Estimate correlation;
};
CrtScalingReport verify_crt_scaling(const NetworkModel& model, std::size_t n,
                                    std::size_t replicates, double EUstar, const McConfig& cfg,
                                    std::size_t grid_size = 1024);

/// A biased color network with its self-normalized weight (1 under exact
/// rejection).
struct WeightedColor {
  ColorNetwork network;
  double weight = 1.0;
  /// Lineages alive at time 0.
  int K = 0;
};

/// Color holding a uniform point of the limit network: K ~ nu_circ, past X'
/// and future X'' from K pasted back to back, focal point uniform among the
/// K lineages at time 0, biased by zeta^M. Rejection when zeta <= 1,
/// weighting otherwise.
WeightedColor sample_focal_network(const ModelParams& params, double zeta, RngStream& rng,
                                   std::uint64_t max_retries = 10'000'000);
/// Color holding the mutation on the spine: X'' starts from K - 1, the jump
/// at 0 is a Mutation and is the focal point; bias zeta^M.
WeightedColor sample_spinal_network(const ModelParams& params, double zeta, RngStream& rng,
                                    std::uint64_t max_retries = 10'000'000);

/// Neighbourhood of the focal point in the local limit, truncated at color
/// tree distance r from the focal color.
struct BallVertex {
  ColorNetwork decoration;
  int outdegree = 0;
  /// Color tree distance from the focal color.
  int distance = 0;
  /// Parent in the color tree; nullopt for the top spine vertex.
  std::optional<std::size_t> parent;
  /// Mutation index of the parent decoration this color's root is glued to.
  std::size_t parent_slot = 0;
  /// 0 for the focal color, k for spine vertex v_k, -1 off the spine.
  int spine_index = -1;
};
struct LocalBall {
  int r = 0;
  /// vertices[0] is the focal color.
  std::vector<BallVertex> vertices;
  FocalPoint focal;
  double weight = 1.0;
  /// Lineages of the focal color alive at the focal point.
  int N = 0;
};
LocalBall sample_local_ball(const NetworkModel& model, int r, RngStream& rng);

/// Law of the number of same-color lineages alive with a uniform point.
/// Reversed: nu_circ(k) E_k[zeta^M]^2 / reversal_mark_factor(k).
/// Literal: nu_circ(k) E_k[zeta^M]^2. Both normalized over k.
enum class ProbNForm { Reversed, Literal };
struct ProbNTable {
  std::vector<double> probs;  // probs[k-1] = P(N = k)
  double tail_bound = 0.0;
  double normalizer = 0.0;
};
ProbNTable prob_N_table(const ModelParams& params, double zeta, ProbNForm form = ProbNForm::Reversed,
                        double tol = 1e-12);
double prob_N(const ModelParams& params, double zeta, int k, ProbNForm form = ProbNForm::Reversed);

/// Statistics of a uniform point in a finite network.
struct PointView {
  int N = 0;             // same-color lineages alive at the point
  double since = 0.0;    // time since the color's founding mutation
  int outdegree = 0;     // outdegree of the color
};
PointView view_from_point(const GluedNetwork& g, const PointRef& x);

}  // namespace phylonet
