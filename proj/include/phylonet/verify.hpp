#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "json.hpp"
#include "phylonet/io.hpp"
#include "phylonet/limits.hpp"
#include "phylonet/model.hpp"
#include "phylonet/montecarlo.hpp"

namespace phylonet::verify {

using nlohmann::json;

/// One pass/fail check with the statistics it was decided on.
struct Check {
  std::string name;
  bool passed = false;
  std::string summary;
  json data = json::object();
};

using io::to_json;
json to_json(const Check& c);
json to_json(const TestResult& t);

// Model checks.
/// E[T s^M] under mu against E_{s mu}[T exp((s-1) mu L)].
Check measure_change(const ModelParams& p, double s, std::size_t samples, const McConfig& mc);
/// Pasting sampler X^m against raw paths accepted with probability M / cap
/// and read at a uniform mutation: K (chi2), duration (KS), M (chi2).
std::vector<Check> x_mut_view(const ModelParams& p, std::size_t samples, const McConfig& mc);
/// Monte Carlo mean of M against the series.
Check expected_M_mc(const ModelParams& p, std::size_t samples, const McConfig& mc);

// Analytics checks.
/// |E[M] - closed| <= 1e-10 and |E[M] - partial sums| <= 1e-10, timed.
Check expected_M_exact(const ModelParams& p, double closed_form, const std::string& label);
/// Convergent enclosures on the grid {0, 0.1, ..., 1} at depths 1..max_depth.
Check convergents(const ModelParams& p, int max_depth, json* table = nullptr);
Check convergent_gap_at(const ModelParams& p, int depth, double bound);
Check extinction(const ModelParams& p, std::optional<double> exact, bool check_simple_bounds);
Check tilt_identity(const ModelParams& p);
Check malthusian_sign(const std::vector<ModelParams>& grid);
/// mu E[int X_t exp(-lambda t) dt] = 1 at the Malthusian lambda.
Check malthusian_identity(const ModelParams& p, std::size_t samples, const McConfig& mc);

// Network checks.
Check tree_methods(const NetworkModel& m, std::size_t n, std::size_t samples, const McConfig& mc);
/// Exact (1/n) P(S_n = -1) against GW size frequencies for n <= n_max.
Check dwass_small(const NetworkModel& m, std::size_t n_max, std::size_t samples, const McConfig& mc);
/// Ratio to n^{-3/2} / sqrt(2 pi sigma^2) within `band` at the last n and
/// |ratio - 1| decreasing over ns.
Check dwass_asymptotic(const NetworkModel& m, const std::vector<std::size_t>& ns, double band);
/// Tilted and direct samplers at small n: |G_n| (KS) and lineage count (chi2).
std::vector<Check> samplers_agree(const NetworkModel& m, std::size_t n, std::size_t samples,
                                  const McConfig& mc);
/// Height equals root distance, |G| = sum L_v, symmetry and triangle
/// inequality, on sampled networks.
std::vector<Check> network_metric(const NetworkModel& m, std::size_t n, std::size_t networks,
                                  std::size_t points, const McConfig& mc);
/// Alive-count reconstruction and M, L consistency of decorations.
Check decoration_consistency(const NetworkModel& m, std::size_t samples, const McConfig& mc);

// Limit checks.
std::vector<Check> crt_dual_estimators(const CrtConstants& c);
Check length_per_color(const CrtScalingReport& r, const CrtConstants& c);
Check max_height(const CrtScalingReport& r, const CrtConstants& c, const Estimate& sup_e,
                 double band);
Check deviation_trend(const std::vector<CrtScalingReport>& reports);
/// N law of the local-ball sampler against prob_N.
Check prob_N_internal(const NetworkModel& m, std::size_t samples, const McConfig& mc);
/// N law around uniform points of sampled G_n against prob_N.
Check prob_N_finite(const NetworkModel& m, std::size_t n, std::size_t networks,
                    std::size_t points, const McConfig& mc);
/// At zeta = 1 prob_N equals nu_circ.
Check prob_N_critical(const ModelParams& critical);
/// Joint law of (time since the founding mutation, N) at finite n against
/// the decomposition with reversed marks.
Check time_since_mutation(const NetworkModel& m, std::size_t n, std::size_t networks,
                          std::size_t points, std::size_t mc_samples, const McConfig& mc);
/// Focal outdegree in the local ball against the outdegree of the color
/// holding a uniform point of G_n.
Check focal_outdegree(const NetworkModel& m, std::size_t samples, std::size_t n,
                      std::size_t networks, std::size_t points, const McConfig& mc);

/// Configuration of a verification suite.
struct SuiteConfig {
  ModelParams params{1.0, 1.0, 1.0};
  McConfig mc;
  std::size_t samples = 100000;
  std::size_t n = 500;
  std::size_t replicates = 1000;
};

struct SuiteReport {
  std::string suite;
  std::vector<Check> checks;
  bool passed() const;
  json to_json() const;
};

const std::vector<std::string>& suite_names();
/// Throws UsageError for an unknown suite.
SuiteReport run_suite(const std::string& suite, const SuiteConfig& cfg);

/// Acceptance criteria 1..11.
struct Criterion {
  int id = 0;
  std::string title;
  std::vector<Check> checks;
  double seconds = 0.0;
  bool passed() const;
};
inline constexpr int kCriteria = 11;
Criterion run_criterion(int id, const McConfig& mc);

}  // namespace phylonet::verify
