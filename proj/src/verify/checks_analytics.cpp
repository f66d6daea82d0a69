#include <chrono>
#include <cmath>
#include <sstream>

#include "phylonet/errors.hpp"
#include "phylonet/verify.hpp"

namespace phylonet::verify {

namespace {

enum : std::uint64_t { kTagPsi = 0x301 };

std::string fmt(double x) {
  std::ostringstream s;
  s.precision(12);
  s << x;
  return s.str();
}

// Independent partial sums of mu sum_j prod_{k<=j} 1/rho_k in long double.
long double partial_sum_M(const ModelParams& p) {
  long double sum = 0.0L, prod = 1.0L;
  for (std::size_t j = 1; j < 100000; ++j) {
    prod /= static_cast<long double>(p.alpha + p.mu + (static_cast<double>(j) - 1.0) * p.beta);
    long double term = static_cast<long double>(p.mu) * prod;
    sum += term;
    if (term < 1e-22L * sum) break;
  }
  return sum;
}

}  // namespace

Check expected_M_exact(const ModelParams& p, double closed_form, const std::string& label) {
  // Warm call, then the median of repeated timings.
  CertifiedValue em = expected_M(p);
  std::vector<double> times;
  for (int r = 0; r < 101; ++r) {
    auto t0 = std::chrono::steady_clock::now();
    em = expected_M(p);
    times.push_back(std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
  }
  std::nth_element(times.begin(), times.begin() + 50, times.end());
  double secs = times[50];
  double oracle = static_cast<double>(partial_sum_M(p));
  double v = em.mid();
  Check c;
  c.name = "expected_M_" + label;
  c.passed = std::abs(v - closed_form) <= 1e-10 && std::abs(v - oracle) <= 1e-10 &&
             em.contains(oracle, 1e-10) && secs < 1e-3;
  c.summary = "E[M] = " + fmt(v) + ", closed form " + fmt(closed_form) + ", partial sums " +
              fmt(oracle) + ", " + fmt(secs * 1e6) + " us";
  c.data = {{"enclosure", to_json(em)},
            {"closed_form", closed_form},
            {"partial_sums", oracle},
            {"seconds", secs}};
  return c;
}

Check convergents(const ModelParams& p, int max_depth, json* table) {
  std::vector<double> z;
  for (int i = 0; i <= 10; ++i) z.push_back(i / 10.0);
  bool ordered = true, bounded = true;
  json rows = json::array();
  for (int n = 1; n <= max_depth; ++n) {
    auto cv = g_convergents_grid(p, z, n);
    double gap = 0.0;
    json lo = json::array(), hi = json::array();
    for (const auto& c : cv) {
      if (!(c.lower <= c.upper)) ordered = false;
      gap = std::max(gap, c.upper - c.lower);
      lo.push_back(c.lower);
      hi.push_back(c.upper);
    }
    double bound = convergent_gap_bound(p, n);
    if (gap > bound * (1.0 + 1e-9) + 1e-16) bounded = false;
    rows.push_back({{"depth", n}, {"sup_gap", gap}, {"bound", bound}, {"lower", lo}, {"upper", hi}});
  }
  Check c;
  c.name = "convergent_enclosures";
  c.passed = ordered && bounded;
  c.summary = std::string(ordered ? "lower <= upper" : "lower > upper somewhere") + ", " +
              (bounded ? "sup-gap within prod 1/rho_k" : "sup-gap exceeds prod 1/rho_k");
  c.data = {{"max_depth", max_depth}, {"z", z}};
  if (table) *table = rows;
  return c;
}

Check convergent_gap_at(const ModelParams& p, int depth, double bound) {
  std::vector<double> z;
  for (int i = 0; i <= 10; ++i) z.push_back(i / 10.0);
  auto cv = g_convergents_grid(p, z, depth);
  double gap = 0.0;
  for (const auto& x : cv) gap = std::max(gap, x.upper - x.lower);
  Check c;
  c.name = "gap_at_depth_" + std::to_string(depth);
  c.passed = gap < bound;
  c.summary = "sup-gap " + fmt(gap) + " vs " + fmt(bound);
  c.data = {{"sup_gap", gap}, {"threshold", bound}};
  return c;
}

Check extinction(const ModelParams& p, std::optional<double> exact, bool check_simple_bounds) {
  auto t0 = std::chrono::steady_clock::now();
  CertifiedValue pe = extinction_probability(p);
  double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  auto [lo, hi] = simple_pext_bounds(p);
  bool ok = secs < 1.0;
  json d = {{"enclosure", to_json(pe)}, {"simple_bounds", {lo, hi}}, {"seconds", secs}};
  std::string s = "p_ext in [" + fmt(pe.lower) + ", " + fmt(pe.upper) + "]";
  if (exact) ok = ok && pe.lower == *exact && pe.upper == *exact;
  if (check_simple_bounds) ok = ok && pe.lower >= lo && pe.upper <= hi;
  if (pe.mid() < 1.0) {
    double g = g_eval(p, pe.mid()).mid();
    d["fixed_point_residual"] = std::abs(g - pe.mid());
    ok = ok && std::abs(g - pe.mid()) <= 1e-8;
    s += ", |g(p) - p| = " + fmt(std::abs(g - pe.mid()));
  }
  Check c;
  c.name = "extinction_probability";
  c.passed = ok;
  c.summary = s;
  c.data = d;
  return c;
}

Check tilt_identity(const ModelParams& p) {
  TiltSolution t = zeta_tilt(p);
  double phi = tilt_phi(p, t.zeta);
  Check c;
  c.name = "tilt_phi_equals_one";
  c.passed = std::abs(phi - 1.0) <= 1e-8;
  c.summary = "zeta = " + fmt(t.zeta) + ", |phi(zeta) - 1| = " + fmt(std::abs(phi - 1.0));
  c.data = {{"zeta", t.zeta},
            {"E_zetaM", t.E_zetaM},
            {"sigma_hat_sq", t.sigma_hat_sq},
            {"phi_residual", std::abs(phi - 1.0)}};
  return c;
}

Check malthusian_sign(const std::vector<ModelParams>& grid) {
  bool ok = true;
  json rows = json::array();
  for (const auto& p : grid) {
    double em = expected_M(p).mid();
    double lam = malthusian(p);
    bool agree = (lam > 0) == (em > 1.0) && (lam < 0) == (em < 1.0);
    ok = ok && agree;
    rows.push_back({{"alpha", p.alpha}, {"beta", p.beta}, {"mu", p.mu}, {"expected_M", em},
                    {"lambda", lam}, {"agree", agree}});
  }
  Check c;
  c.name = "malthusian_sign";
  c.passed = ok;
  c.summary = std::to_string(grid.size()) + " parameter points";
  c.data = {{"grid", rows}};
  return c;
}

Check malthusian_identity(const ModelParams& p, std::size_t samples, const McConfig& mc) {
  double lam = malthusian(p);
  // int_a^b e^{-lam t} dt without cancellation near lam = 0.
  auto seg = [lam](double a, double b) {
    double d = b - a;
    if (std::abs(lam * d) < 1e-8) return std::exp(-lam * a) * d;
    return std::exp(-lam * a) * (-std::expm1(-lam * d)) / lam;
  };
  auto acc = mc_reduce<MeanAccumulator>(samples, mc, kTagPsi,
                                        [&](RngStream& rng, std::size_t, std::size_t count) {
    MeanAccumulator a;
    for (std::size_t i = 0; i < count; ++i) {
      MarkedTrajectory x = simulate_trajectory(p, 1, rng);
      double prev = 0.0, total = 0.0;
      int k = 1;
      for (const Event& e : x.events()) {
        total += k * seg(prev, e.time);
        prev = e.time;
        k += e.kind == EventKind::Birth ? 1 : -1;
      }
      a.add(p.mu * total);
    }
    return a;
  });
  Check c;
  c.name = "malthusian_identity";
  c.passed = std::abs(acc.mean() - 1.0) <= 3.0 * acc.std_error();
  c.summary = "lambda = " + fmt(lam) + ", mu E[int X e^{-lambda t}] = " + fmt(acc.mean()) +
              " +- " + fmt(acc.std_error());
  c.data = {{"lambda", lam}, {"estimate", to_json(Estimate{acc.mean(), acc.std_error(), acc.count(), {}})}};
  return c;
}

}  // namespace phylonet::verify
