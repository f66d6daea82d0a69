#include "phylonet/analytics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "phylonet/errors.hpp"
#include "phylonet/kernels.hpp"
#include "phylonet/stats.hpp"

namespace phylonet {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

// Slack for rounding in the backward recursions (a few ulps per level,
// contracted by the outer levels).
double rounding_slack(double v) { return 64.0 * kEps * std::max(1.0, std::abs(v)); }

double clip01(double x) { return std::clamp(x, 0.0, 1.0); }

void check_z(double z) {
  if (!(z >= 0.0) || !std::isfinite(z)) throw std::invalid_argument("z must be finite and >= 0");
}

void check_level(int start_level) {
  if (start_level < 1) throw std::invalid_argument("start level must be >= 1");
}

struct Coefficients {
  std::vector<double> c;  // alpha + (k-1) beta
  std::vector<double> d;  // 1 + rho_k
};

Coefficients coefficients(const ModelParams& p, int start, int depth) {
  Coefficients out;
  std::size_t n = static_cast<std::size_t>(depth - start + 1);
  out.c.resize(n);
  out.d.resize(n);
  for (std::size_t j = 0; j < n; ++j) {
    std::size_t k = static_cast<std::size_t>(start) + j;
    out.c[j] = p.alpha + static_cast<double>(k - 1) * p.beta;
    out.d[j] = 1.0 + p.rho(k);
  }
  return out;
}

[[noreturn]] void beyond_radius(double z) {
  throw BeyondRadius("continued fraction crossed a pole at z=" + std::to_string(z));
}

// All levels g_start..g_{start+keep-1} of one backward pass with the given
// terminal; returns false if a denominator was nonpositive.
bool level_pass(const ModelParams& p, double z, int start, int depth, double terminal, int keep,
                std::vector<double>& out) {
  out.assign(static_cast<std::size_t>(keep), 0.0);
  double g = terminal;
  for (int k = depth; k >= start; --k) {
    double den = 1.0 + p.rho(static_cast<std::size_t>(k)) - g;
    if (!(den > 0.0)) return false;
    g = (p.alpha + (k - 1) * p.beta + p.mu * z) / den;
    if (k - start < keep) out[static_cast<std::size_t>(k - start)] = g;
  }
  return true;
}

int next_depth(int depth) {
  if (depth >= kMaxDepth) throw DepthExhausted("continued fraction depth cap reached");
  return std::min(depth * 2, kMaxDepth);
}

}  // namespace

CertifiedValue expected_M(const ModelParams& p, double tol) {
  if (!(tol > 0.0)) throw std::invalid_argument("tol must be > 0");
  CompensatedSum sum;
  double prod = 1.0;
  for (int j = 1;; ++j) {
    prod /= p.rho(static_cast<std::size_t>(j));
    double term = p.mu * prod;
    sum.add(term);
    double r = 1.0 / p.rho(static_cast<std::size_t>(j) + 1);
    if (r < 1.0) {
      double tail = term * r / (1.0 - r);
      double s = sum.value();
      if (tail <= tol || j >= kMaxDepth) {
        CertifiedValue v{s - rounding_slack(s), s + tail + rounding_slack(s), j, true};
        v.lower = std::max(v.lower, 0.0);
        if (tail > tol) v.certified = false;
        return v;
      }
    } else if (j >= kMaxDepth) {
      throw DepthExhausted("expected_M: series not converging within the depth cap");
    }
  }
}

double g_tail_closed_form(const ModelParams& p, int n, double z) {
  double r = p.rho(static_cast<std::size_t>(n));
  double arg = (1.0 - r) * (1.0 - r) - 4.0 * p.mu * (z - 1.0);
  if (arg < 0.0) return std::numeric_limits<double>::quiet_NaN();
  return 0.5 * (1.0 + r - std::sqrt(arg));
}

std::vector<Convergents> g_convergents_grid(const ModelParams& p, const std::vector<double>& z,
                                            int depth, int start_level) {
  check_level(start_level);
  if (depth < start_level) throw std::invalid_argument("depth must be >= start level");
  for (double x : z) check_z(x);
  auto co = coefficients(p, start_level, depth);
  std::size_t m = z.size();
  std::vector<double> zz(2 * m), term(2 * m), out(2 * m);
  for (std::size_t i = 0; i < m; ++i) {
    zz[i] = zz[m + i] = z[i];
    term[i] = 1.0;
    double tail = g_tail_closed_form(p, depth, z[i]);
    term[m + i] = std::isnan(tail) ? 1.0 : tail;
  }
  double min_den = kernels::cf_backward(co.c.data(), co.d.data(), co.c.size(), p.mu, zz.data(),
                                        term.data(), out.data(), 2 * m);
  if (!(min_den > 0.0)) beyond_radius(z.empty() ? 0.0 : z.back());
  std::vector<Convergents> res(m);
  for (std::size_t i = 0; i < m; ++i) {
    bool has_tail = !std::isnan(g_tail_closed_form(p, depth, z[i]));
    res[i].upper = out[i];
    res[i].lower = has_tail ? out[m + i] : std::numeric_limits<double>::quiet_NaN();
  }
  return res;
}

Convergents g_convergents(const ModelParams& p, double z, int depth, int start_level) {
  return g_convergents_grid(p, {z}, depth, start_level)[0];
}

double convergent_gap_bound(const ModelParams& p, int depth, int start_level) {
  double prod = 1.0;
  for (int k = start_level; k <= depth; ++k) prod /= p.rho(static_cast<std::size_t>(k));
  return prod;
}

CertifiedValue g_eval(const ModelParams& p, double z, int start_level, double tol) {
  check_z(z);
  check_level(start_level);
  int extra = kInitialDepth;
  if (z <= 1.0) {
    for (;;) {
      int depth = start_level - 1 + extra;
      Convergents c = g_convergents(p, z, depth, start_level);
      double lo = std::min(c.lower, c.upper), hi = std::max(c.lower, c.upper);
      if (hi - lo <= tol || extra >= kMaxDepth) {
        CertifiedValue v{clip01(lo - rounding_slack(lo)), clip01(hi + rounding_slack(hi)), depth,
                         hi - lo <= tol};
        return v;
      }
      extra = next_depth(extra);
    }
  }
  // Beyond 1 only the terminal-1 convergents are available; compare depths n and 2n.
  std::vector<double> a, b;
  for (;;) {
    int d1 = start_level - 1 + extra, d2 = start_level - 1 + 2 * extra;
    if (!level_pass(p, z, start_level, d1, 1.0, 1, a) ||
        !level_pass(p, z, start_level, d2, 1.0, 1, b) || !(a[0] > 0.0) || !(b[0] > 0.0))
      beyond_radius(z);
    double diff = std::abs(a[0] - b[0]);
    if (diff <= tol * std::max(1.0, b[0])) {
      double slack = rounding_slack(b[0]);
      return CertifiedValue{std::min(a[0], b[0]) - slack, std::max(a[0], b[0]) + slack, d2, false};
    }
    extra = next_depth(extra);
  }
}

namespace {

// Joint backward recursion for (g, g', g'') with terminal (1, 0, 0).
bool series_pass(const ModelParams& p, double z, int start, int depth, GSeries& out) {
  double g = 1.0, g1 = 0.0, g2 = 0.0;
  for (int k = depth; k >= start; --k) {
    double den = 1.0 + p.rho(static_cast<std::size_t>(k)) - g;
    if (!(den > 0.0)) return false;
    double num = p.alpha + (k - 1) * p.beta + p.mu * z;
    double dd1 = -g1, dd2 = -g2;
    double ng = num / den;
    double ng1 = (p.mu - ng * dd1) / den;
    double ng2 = (-2.0 * ng1 * dd1 - ng * dd2) / den;
    g = ng;
    g1 = ng1;
    g2 = ng2;
  }
  if (!std::isfinite(g) || !std::isfinite(g1) || !std::isfinite(g2) || g <= 0.0) return false;
  out.g = g;
  out.d1 = g1;
  out.d2 = g2;
  return true;
}

}  // namespace

GSeries g_series(const ModelParams& p, double z, double tol, int start_level) {
  check_z(z);
  check_level(start_level);
  int extra = kInitialDepth;
  for (;;) {
    GSeries a, b;
    int d1 = start_level - 1 + extra, d2 = start_level - 1 + 2 * extra;
    if (!series_pass(p, z, start_level, d1, a) || !series_pass(p, z, start_level, d2, b))
      beyond_radius(z);
    double e = std::max({std::abs(a.g - b.g) / std::max(1.0, std::abs(b.g)),
                         std::abs(a.d1 - b.d1) / std::max(1.0, std::abs(b.d1)),
                         std::abs(a.d2 - b.d2) / std::max(1.0, std::abs(b.d2))});
    if (e <= tol) {
      b.error = std::max({std::abs(a.g - b.g), std::abs(a.d1 - b.d1), std::abs(a.d2 - b.d2)});
      b.depth = d2;
      return b;
    }
    extra = next_depth(extra);
  }
}

CertifiedValue g_derivatives(const ModelParams& p, double z, int order, double tol) {
  if (order != 1 && order != 2) throw std::invalid_argument("g_derivatives: order must be 1 or 2");
  GSeries s = g_series(p, z, tol);
  double v = order == 1 ? s.d1 : s.d2;
  double w = std::max(s.error, rounding_slack(v));
  return CertifiedValue{v - w, v + w, s.depth, false};
}

CertifiedValue extinction_probability(const ModelParams& p, double tol) {
  CertifiedValue em = expected_M(p, std::min(tol, 1e-13));
  if (em.upper <= 1.0) return CertifiedValue{1.0, 1.0, em.depth, true};
  // Newton on h(z) = g(z) - z from z = 0: h is convex and decreasing up to
  // the smallest root, so the iterates increase monotonically toward it.
  double z = 0.0;
  for (int it = 0; it < 200; ++it) {
    GSeries s = g_series(p, z, 1e-15);
    double h = s.g - z, dh = s.d1 - 1.0;
    if (!(dh < 0.0)) break;
    double next = z - h / dh;
    if (!(next < 1.0)) break;
    bool done = std::abs(next - z) <= 1e-3 * tol;
    z = next;
    if (done) break;
  }
  if (em.lower <= 1.0) return CertifiedValue{std::min(z, 1.0), 1.0, em.depth, false};
  // Certify: g_low(lo) >= lo puts lo below the root; g_up(hi) <= hi puts hi above.
  double delta = std::max(0.25 * tol, 4.0 * kEps);
  double inner = std::min(0.01 * tol, 1e-14);
  for (int it = 0; it < 60; ++it) {
    double lo = std::max(z - delta, 0.0), hi = std::min(z + delta, 1.0);
    CertifiedValue glo = g_eval(p, lo, 1, inner);
    CertifiedValue ghi = g_eval(p, hi, 1, inner);
    if (glo.lower >= lo && ghi.upper <= hi) return CertifiedValue{lo, hi, ghi.depth, true};
    delta *= 2.0;
  }
  return CertifiedValue{0.0, 1.0, 0, false};
}

std::pair<double, double> simple_pext_bounds(const ModelParams& p) {
  double a = p.alpha, b = p.beta, m = p.mu;
  double s = b + m - 1.0;
  double lower = a / (2.0 * m) * (s + std::sqrt(s * s + 4.0 * m));
  double upper = a * ((a + b + m) * (a + 2.0 * b + m) + m) / (m * (1.0 + 2.0 * a + 2.0 * b + m));
  return {clip01(lower), clip01(upper)};
}

double OffspringPmf::mean() const {
  double s = 0.0;
  for (std::size_t m = 0; m < probs.size(); ++m) s += static_cast<double>(m) * probs[m];
  return s;
}

OffspringPmf offspring_pmf(const ModelParams& p, int m_max, double tol) {
  if (m_max < 0) throw std::invalid_argument("offspring_pmf: m_max must be >= 0");
  // State truncation: paths never observed above level n contribute exactly;
  // the rest is bounded by the E[M] series tail past n (Markov's inequality).
  double target = std::min(tol, 1e-30);
  int n = kInitialDepth;
  double gap = convergent_gap_bound(p, n);
  while (gap > target && n < kMaxDepth) {
    ++n;
    gap /= p.rho(static_cast<std::size_t>(n));
  }
  double defect = 0.0;
  {
    double prod = convergent_gap_bound(p, n);
    for (int j = n + 1; j <= n + 4096; ++j) {
      prod /= p.rho(static_cast<std::size_t>(j));
      defect += p.mu * prod;
      if (p.mu * prod < 1e-300) break;
    }
  }
  const std::size_t len = static_cast<std::size_t>(m_max) + 1;
  std::vector<double> P(len, 0.0), Q(len, 0.0), rev(len, 0.0);
  P[0] = 1.0;  // M_{n+1} = 0 under the truncation
  for (int k = n; k >= 1; --k) {
    double r = p.rho(static_cast<std::size_t>(k));
    double theta = r / (1.0 + r);
    double pk = p.mu / r;
    // Q = law of sum of Geom(theta) copies of P:  Q = theta delta_0 + (1-theta) P * Q.
    std::reverse_copy(P.begin(), P.end(), rev.begin());
    double scale = 1.0 / (1.0 - (1.0 - theta) * P[0]);
    Q[0] = theta * scale;
    for (std::size_t m = 1; m < len; ++m) {
      double conv = kernels::dot(Q.data(), rev.data() + (len - 1 - m), m);
      Q[m] = (1.0 - theta) * conv * scale;
    }
    P[0] = (1.0 - pk) * Q[0];
    for (std::size_t m = 1; m < len; ++m) P[m] = (1.0 - pk) * Q[m] + pk * Q[m - 1];
  }
  OffspringPmf out;
  out.probs = std::move(P);
  CompensatedSum total;
  for (double x : out.probs) total.add(x);
  out.tail_bound = std::max(0.0, 1.0 - total.value()) + defect;
  out.m_max = m_max;
  out.state_trunc = n;
  return out;
}

double tilt_phi(const ModelParams& p, double s, double tol) {
  GSeries g = g_series(p, s, tol);
  return s * g.d1 / g.g;
}

TiltSolution zeta_tilt(const ModelParams& p, double tol) {
  TiltSolution sol;
  double em = expected_M(p, 1e-14).mid();
  double lo, hi;
  double radius = 1.0;
  if (em == 1.0) {
    lo = hi = 1.0;
  } else if (em < 1.0) {
    lo = 1.0;
    double step = 1.0;
    for (;;) {
      double s = lo + step;
      try {
        double phi = tilt_phi(p, s);
        radius = std::max(radius, s);
        if (phi > 1.0) {
          hi = s;
          break;
        }
        lo = s;
        step *= 2.0;
      } catch (const NumericError&) {
        step *= 0.5;
        if (step < 1e-3 * tol)
          throw BracketFailure("zeta_tilt: pole reached before phi exceeds 1; best bracket [" +
                               std::to_string(lo) + ", " + std::to_string(lo + 2.0 * step) + "]");
      }
    }
  } else {
    hi = 1.0;
    lo = 0.5;
    while (tilt_phi(p, lo) >= 1.0) {
      hi = lo;
      lo *= 0.5;
      if (lo < 1e-300) throw BracketFailure("zeta_tilt: no lower bracket");
    }
  }
  while (hi - lo > 1e-3 * tol * std::max(1.0, hi)) {
    double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (tilt_phi(p, mid) < 1.0)
      lo = mid;
    else
      hi = mid;
  }
  double zeta = 0.5 * (lo + hi);
  GSeries g = g_series(p, zeta, 1e-15);
  sol.zeta = zeta;
  sol.E_zetaM = g.g;
  sol.sigma_hat_sq = (zeta * g.d1 + zeta * zeta * g.d2) / g.g - 1.0;
  sol.radius_hint = radius;
  return sol;
}

TiltedOffspring make_tilted_offspring(const ModelParams& p, const TiltSolution& tilt, double tol) {
  TiltedOffspring out;
  out.tilt = tilt;
  double lz = std::log(tilt.zeta);
  double lE = std::log(tilt.E_zetaM);
  for (int m_max = 64;; m_max *= 2) {
    OffspringPmf pmf = offspring_pmf(p, m_max);
    out.probs.assign(pmf.probs.size(), 0.0);
    CompensatedSum total;
    for (std::size_t m = 0; m < pmf.probs.size(); ++m) {
      double pm = pmf.probs[m];
      out.probs[m] = pm > 0.0 ? std::exp(static_cast<double>(m) * lz + std::log(pm) - lE) : 0.0;
      total.add(out.probs[m]);
    }
    out.tail = std::max(0.0, 1.0 - total.value());
    if (out.tail <= tol || m_max >= 4096) break;
  }
  out.cdf = cumulative(out.probs);
  return out;
}

NuCircPmf nu_circ_pmf(const ModelParams& p, double tol) {
  NuCircPmf out;
  std::vector<double> w;
  CompensatedSum total;
  double prod = 1.0;
  for (std::size_t n = 1;; ++n) {
    prod /= p.rho(n);
    w.push_back(prod);
    total.add(prod);
    double r = 1.0 / p.rho(n + 1);
    if (r < 1.0) {
      double tail = prod * r / (1.0 - r);
      if (tail <= tol * total.value()) {
        out.tail_bound = tail / total.value();
        break;
      }
    }
    if (n >= static_cast<std::size_t>(kMaxDepth) * 16)
      throw DepthExhausted("nu_circ_pmf: weights not summable within cap");
  }
  out.normalizer = total.value();
  out.probs.resize(w.size());
  for (std::size_t i = 0; i < w.size(); ++i) out.probs[i] = w[i] / out.normalizer;
  return out;
}

namespace {

void check_lambda(const ModelParams& p, double lambda) {
  if (!(lambda > -(1.0 + p.alpha + p.mu)) || !std::isfinite(lambda))
    throw std::invalid_argument("lambda must exceed -(1 + alpha + mu)");
}

// f_j for j = k..k+keep-1 with f_{depth+1} = terminal; false on a nonpositive
// denominator.
bool laplace_pass(const ModelParams& p, double lambda, int k, int depth, double terminal, int keep,
                  std::vector<double>& out) {
  out.assign(static_cast<std::size_t>(keep), 0.0);
  double f = terminal;
  for (int j = depth; j >= k; --j) {
    double r = p.rho(static_cast<std::size_t>(j));
    double den = 1.0 + r + lambda / j - f;
    if (!(den > 0.0)) return false;
    f = r / den;
    if (j - k < keep) out[static_cast<std::size_t>(j - k)] = f;
  }
  return true;
}

[[noreturn]] void divergent(double lambda) {
  throw DivergentTail("Laplace continued fraction diverges at lambda=" + std::to_string(lambda));
}

}  // namespace

CertifiedValue laplace_f(const ModelParams& p, int k, double lambda, double tol) {
  if (k < 1) throw std::invalid_argument("laplace_f: k must be >= 1");
  check_lambda(p, lambda);
  int extra = kInitialDepth;
  if (lambda >= 0.0) {
    for (;;) {
      int depth = k - 1 + extra;
      std::size_t levels = static_cast<std::size_t>(extra);
      std::vector<double> c(levels), d(levels);
      for (std::size_t j = 0; j < levels; ++j) {
        int lvl = k + static_cast<int>(j);
        c[j] = p.rho(static_cast<std::size_t>(lvl));
        d[j] = 1.0 + c[j] + lambda / lvl;
      }
      double z[2] = {0.0, 0.0}, term[2] = {0.0, 1.0}, out[2];
      double min_den = kernels::cf_backward(c.data(), d.data(), levels, 0.0, z, term, out, 2);
      if (!(min_den > 0.0)) divergent(lambda);
      if (out[1] - out[0] <= tol || extra >= kMaxDepth)
        return CertifiedValue{clip01(out[0] - rounding_slack(out[0])),
                              clip01(out[1] + rounding_slack(out[1])), depth,
                              out[1] - out[0] <= tol};
      extra = next_depth(extra);
    }
  }
  std::vector<double> a, b;
  for (;;) {
    int d1 = k - 1 + extra, d2 = k - 1 + 2 * extra;
    if (!laplace_pass(p, lambda, k, d1, 1.0, 1, a) || !laplace_pass(p, lambda, k, d2, 1.0, 1, b))
      divergent(lambda);
    if (std::abs(a[0] - b[0]) <= tol * std::max(1.0, b[0])) {
      double s = rounding_slack(b[0]);
      return CertifiedValue{std::min(a[0], b[0]) - s, std::max(a[0], b[0]) + s, d2, false};
    }
    extra = next_depth(extra);
  }
}

CertifiedValue malthusian_psi(const ModelParams& p, double lambda, double tol) {
  check_lambda(p, lambda);
  // Number of series terms: the E[M] tail past J is below tol / 100.
  int J = 1;
  {
    double prod = 1.0;
    for (;; ++J) {
      prod /= p.rho(static_cast<std::size_t>(J));
      double r = 1.0 / p.rho(static_cast<std::size_t>(J) + 1);
      if (r < 0.5 && p.mu * prod * r / (1.0 - r) <= 0.01 * tol) break;
      if (J >= kMaxDepth) throw DepthExhausted("malthusian_psi: series cap");
    }
  }
  auto series = [&](const std::vector<double>& f, double& last_term) {
    CompensatedSum s;
    double prod = 1.0;
    for (int j = 1; j <= J; ++j) {
      prod *= f[static_cast<std::size_t>(j - 1)] / p.rho(static_cast<std::size_t>(j));
      s.add(p.mu * prod);
    }
    last_term = p.mu * prod;
    return s.value();
  };
  int extra = kInitialDepth;
  std::vector<double> lo, hi;
  for (;;) {
    int depth = J + extra;
    double t_lo, t_hi;
    if (lambda >= 0.0) {
      if (!laplace_pass(p, lambda, 1, depth, 0.0, J, lo) ||
          !laplace_pass(p, lambda, 1, depth, 1.0, J, hi))
        divergent(lambda);
      double s_lo = series(lo, t_lo), s_hi = series(hi, t_hi);
      double r = 1.0 / p.rho(static_cast<std::size_t>(J) + 1);
      s_hi += t_hi * r / (1.0 - r);  // f_k <= 1 beyond J
      if (s_hi - s_lo <= tol || extra >= kMaxDepth)
        return CertifiedValue{s_lo - rounding_slack(s_lo), s_hi + rounding_slack(s_hi), depth,
                              s_hi - s_lo <= tol};
    } else {
      if (!laplace_pass(p, lambda, 1, depth, 1.0, J + 1, lo) ||
          !laplace_pass(p, lambda, 1, depth + extra, 1.0, J + 1, hi))
        divergent(lambda);
      double s_a = series(lo, t_lo), s_b = series(hi, t_hi);
      double r = hi[static_cast<std::size_t>(J)] / p.rho(static_cast<std::size_t>(J) + 1);
      if (!(r < 1.0)) divergent(lambda);
      double tail = t_hi * r / (1.0 - r);
      double a = s_a + tail, b = s_b + tail;
      if (std::abs(a - b) <= tol * std::max(1.0, b) || extra >= kMaxDepth) {
        double s = rounding_slack(b) + tail * 1e-3;
        return CertifiedValue{std::min(a, b) - s, std::max(a, b) + s, depth + extra, false};
      }
    }
    extra = next_depth(extra);
  }
}

double malthusian(const ModelParams& p, double tol) {
  const double floor = -(1.0 + p.alpha + p.mu);
  double inner = std::min(1e-3 * tol, 1e-13);
  // Psi is decreasing in lambda; where the transform diverges it is +infinity.
  auto psi = [&](double lam) {
    try {
      return malthusian_psi(p, lam, inner).mid();
    } catch (const DivergentTail&) {
      return std::numeric_limits<double>::infinity();
    }
  };
  double p0 = psi(0.0);
  if (std::abs(p0 - 1.0) <= tol) return 0.0;
  double lo, hi;
  if (p0 > 1.0) {
    lo = 0.0;
    hi = 1.0;
    while (psi(hi) > 1.0) {
      lo = hi;
      hi *= 2.0;
      if (hi > 1e12) throw BracketFailure("malthusian: no upper bracket");
    }
  } else {
    hi = 0.0;
    lo = 0.0;
    bool found = false;
    for (int i = 1; i <= 60; ++i) {
      double cand = floor * (1.0 - std::ldexp(1.0, -i));
      if (psi(cand) > 1.0) {
        lo = cand;
        found = true;
        break;
      }
      hi = cand;
    }
    if (!found)
      throw BracketFailure("malthusian: Psi stays below 1 down to lambda=" + std::to_string(floor) +
                           "; root not bracketed");
  }
  for (int it = 0; it < 200; ++it) {
    double mid = 0.5 * (lo + hi);
    double v = psi(mid);
    if (std::abs(v - 1.0) <= tol && hi - lo < 1e-6) return mid;
    if (v > 1.0)
      lo = mid;
    else
      hi = mid;
    if (hi - lo <= 1e-15 * std::max(1.0, std::abs(mid))) return mid;
  }
  return 0.5 * (lo + hi);
}

CertifiedValue pgf_from_state(const ModelParams& p, int k, double z, double tol) {
  if (k < 0) throw std::invalid_argument("pgf_from_state: k must be >= 0");
  check_z(z);
  if (k == 0) return CertifiedValue{1.0, 1.0, 0, true};
  int extra = kInitialDepth;
  std::vector<double> a, b;
  auto product = [](const std::vector<double>& v) {
    double s = 1.0;
    for (double x : v) s *= x;
    return s;
  };
  for (;;) {
    int depth = k + extra;
    if (z <= 1.0) {
      double tail = g_tail_closed_form(p, depth, z);
      if (!level_pass(p, z, 1, depth, tail, k, a) || !level_pass(p, z, 1, depth, 1.0, k, b))
        beyond_radius(z);
      double lo = product(a), hi = product(b);
      if (hi - lo <= tol || extra >= kMaxDepth)
        return CertifiedValue{clip01(lo - k * rounding_slack(lo)),
                              clip01(hi + k * rounding_slack(hi)), depth, hi - lo <= tol};
    } else {
      if (!level_pass(p, z, 1, depth, 1.0, k, a) || !level_pass(p, z, 1, depth + extra, 1.0, k, b))
        beyond_radius(z);
      double x = product(a), y = product(b);
      if (std::abs(x - y) <= tol * std::max(1.0, y)) {
        double s = k * rounding_slack(y);
        return CertifiedValue{std::min(x, y) - s, std::max(x, y) + s, depth + extra, false};
      }
    }
    extra = next_depth(extra);
  }
}

double tune_mu_for_critical(double alpha, double beta, double tol) {
  auto em = [&](double mu) { return expected_M(ModelParams(alpha, beta, mu), 1e-15).mid(); };
  double lo = 1e-6, hi = 1e6;
  double flo = em(lo) - 1.0, fhi = em(hi) - 1.0;
  if (flo * fhi > 0.0)
    throw BracketFailure("tune_mu_for_critical: E[M] - 1 does not change sign over mu in [1e-6, 1e6]");
  for (int it = 0; it < 400 && hi - lo > tol * std::max(1.0, lo); ++it) {
    double mid = std::sqrt(lo * hi) > 0.0 && hi / lo > 4.0 ? std::sqrt(lo * hi) : 0.5 * (lo + hi);
    double f = em(mid) - 1.0;
    if ((f < 0.0) == (flo < 0.0)) {
      lo = mid;
      flo = f;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace phylonet
