#pragma once

#include <cstddef>
#include <utility>
#include <vector>

#include "phylonet/model.hpp"

namespace phylonet {

inline constexpr double kSeriesTol = 1e-12;
inline constexpr double kRootTol = 1e-10;
inline constexpr int kInitialDepth = 16;
inline constexpr int kMaxDepth = 1 << 16;

/// Enclosure [lower, upper] of an analytic quantity and the truncation depth
/// that produced it. `certified` is false for best-effort estimates (depth
/// agreement rather than a proven bound).
struct CertifiedValue {
  double lower = 0.0;
  double upper = 0.0;
  int depth = 0;
  bool certified = true;

  double mid() const { return 0.5 * (lower + upper); }
  double width() const { return upper - lower; }
  bool contains(double x, double slack = 0.0) const {
    return x >= lower - slack && x <= upper + slack;
  }
};

/// E[M] = mu * sum_j prod_{k<=j} 1/rho_k with a geometric tail majorant.
CertifiedValue expected_M(const ModelParams& params, double tol = kSeriesTol);

/// Pair of convergents of the continued fraction for g_start at a fixed
/// innermost level `depth`: `upper` uses terminal 1, `lower` uses the
/// closed-form tail gbar_depth(z). For z > 1 where gbar is undefined, lower
/// is NaN.
struct Convergents {
  double lower;
  double upper;
};
Convergents g_convergents(const ModelParams& params, double z, int depth, int start_level = 1);
/// Same on a grid of z values, evaluated in one vectorized pass.
std::vector<Convergents> g_convergents_grid(const ModelParams& params, const std::vector<double>& z,
                                            int depth, int start_level = 1);
/// prod_{k=start..depth} 1/rho_k, the bound on the convergent gap over [0,1].
double convergent_gap_bound(const ModelParams& params, int depth, int start_level = 1);
/// gbar_n(z) = (1 + rho_n - sqrt((1 - rho_n)^2 - 4 mu (z - 1))) / 2, NaN if
/// the square root argument is negative.
double g_tail_closed_form(const ModelParams& params, int n, double z);

/// pgf of the mutation count of a `start_level`-excursion, g_k(z) = E[z^{M_k}].
/// Certified for z in [0,1]; for z > 1 a depth-agreement estimate (certified
/// = false). Throws BeyondRadius when a denominator becomes nonpositive.
CertifiedValue g_eval(const ModelParams& params, double z, int start_level = 1,
                      double tol = kSeriesTol);

/// Value and first two derivatives of g at z, propagated through the
/// recursion; `error` is the disagreement between depths n and 2n.
struct GSeries {
  double g = 0.0;
  double d1 = 0.0;
  double d2 = 0.0;
  double error = 0.0;
  int depth = 0;
};
GSeries g_series(const ModelParams& params, double z, double tol = kSeriesTol, int start_level = 1);
/// Enclosure of g^{(order)}(z), order in {1, 2}.
CertifiedValue g_derivatives(const ModelParams& params, double z, int order,
                             double tol = kSeriesTol);

/// Smallest fixed point of g in [0, 1].
CertifiedValue extinction_probability(const ModelParams& params, double tol = kSeriesTol);
/// Closed-form lower and upper bounds on the extinction probability, clipped to [0,1].
std::pair<double, double> simple_pext_bounds(const ModelParams& params);

/// pmf of M on {0..m_max}.
struct OffspringPmf {
  std::vector<double> probs;
  double tail_bound = 0.0;
  int m_max = 0;
  int state_trunc = 0;

  double mean() const;
};
OffspringPmf offspring_pmf(const ModelParams& params, int m_max, double tol = kSeriesTol);

/// Exponential tilt making the offspring law critical.
struct TiltSolution {
  double zeta = 1.0;
  double E_zetaM = 1.0;
  double sigma_hat_sq = 0.0;
  double radius_hint = 1.0;
};
/// phi(s) = s g'(s) / g(s) = E[M s^M] / E[s^M].
double tilt_phi(const ModelParams& params, double s, double tol = 1e-14);
TiltSolution zeta_tilt(const ModelParams& params, double tol = kRootTol);

/// Tilted offspring law P(Mhat = m) = zeta^m p_m / E[zeta^M], with its CDF.
struct TiltedOffspring {
  TiltSolution tilt;
  std::vector<double> probs;
  std::vector<double> cdf;
  double tail = 0.0;
};
TiltedOffspring make_tilted_offspring(const ModelParams& params, const TiltSolution& tilt,
                                      double tol = 1e-13);

/// nu_circ(n) proportional to prod_{k<=n} 1/rho_k; probs[0] is nu_circ(1).
struct NuCircPmf {
  std::vector<double> probs;
  double tail_bound = 0.0;
  /// sum of the unnormalized weights (equals E[M] / mu).
  double normalizer = 0.0;
};
NuCircPmf nu_circ_pmf(const ModelParams& params, double tol = kSeriesTol);

/// f_k(lambda) = E_k[exp(-lambda T_{k-1})] via its continued fraction.
CertifiedValue laplace_f(const ModelParams& params, int k, double lambda, double tol = kSeriesTol);
/// Psi(lambda) = mu sum_j prod_{k<=j} f_k(lambda) / rho_k.
CertifiedValue malthusian_psi(const ModelParams& params, double lambda, double tol = kSeriesTol);
/// Root of Psi(lambda) = 1.
double malthusian(const ModelParams& params, double tol = kRootTol);

/// E_k[z^M] = prod_{j=1..k} g_j(z).
CertifiedValue pgf_from_state(const ModelParams& params, int k, double z, double tol = kSeriesTol);

/// mu such that E[M] = 1 for the given alpha and beta (bisection).
double tune_mu_for_critical(double alpha, double beta, double tol = 1e-13);

}  // namespace phylonet
