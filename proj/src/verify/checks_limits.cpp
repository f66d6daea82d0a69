#include <algorithm>
#include <cmath>
#include <sstream>

#include "phylonet/verify.hpp"

namespace phylonet::verify {

namespace {

enum : std::uint64_t {
  kTagBallN = 0x501,
  kTagFiniteN = 0x502,
  kTagSinceMC = 0x503,
  kTagSinceNet = 0x504,
  kTagFocalDeg = 0x505,
  kTagFocalNet = 0x506,
};

std::string fmt(double x) {
  std::ostringstream s;
  s.precision(6);
  s << x;
  return s.str();
}

Check from_test(const std::string& name, const TestResult& t, json extra = json::object()) {
  Check c;
  c.name = name;
  c.passed = t.passed();
  c.summary = "statistic " + fmt(t.statistic) + ", p = " + fmt(t.p_value);
  extra["test"] = to_json(t);
  c.data = std::move(extra);
  return c;
}

// Views of `points` uniform points in each of `networks` sampled G_n.
std::vector<PointView> finite_views(const NetworkModel& m, std::size_t n, std::size_t networks,
                                    std::size_t points, const McConfig& mc, std::uint64_t tag) {
  auto per = mc_items<std::vector<PointView>>(networks, mc, tag, [&](RngStream& rng, std::size_t) {
    GluedNetwork g = sample_network(m, n, rng);
    std::vector<PointView> v;
    for (std::size_t i = 0; i < points; ++i) v.push_back(view_from_point(g, uniform_point(g, rng)));
    return v;
  });
  std::vector<PointView> out;
  for (auto& v : per) out.insert(out.end(), v.begin(), v.end());
  return out;
}

}  // namespace

std::vector<Check> crt_dual_estimators(const CrtConstants& c) {
  Check eu;
  eu.name = "EUstar_dual_estimators";
  eu.passed = intervals_overlap(c.EUstar.value, c.EUstar.std_error, c.EUstar_decomposition.value,
                                c.EUstar_decomposition.std_error);
  eu.summary = "weighted " + fmt(c.EUstar.value) + " +- " + fmt(c.EUstar.std_error) +
               ", decomposition " + fmt(c.EUstar_decomposition.value) + " +- " +
               fmt(c.EUstar_decomposition.std_error) + " (forward-marked diagnostic " +
               fmt(c.EUstar_literal.value) + ")";
  eu.data = {{"weighted", to_json(c.EUstar)},
             {"decomposition", to_json(c.EUstar_decomposition)},
             {"decomposition_forward_marks", to_json(c.EUstar_literal)}};
  Check ell;
  ell.name = "ell_dual_estimators";
  ell.passed = within_combined_se(c.ell.value, c.ell.std_error, c.ell_measure_change.value,
                                  c.ell_measure_change.std_error);
  ell.summary = "weighted " + fmt(c.ell.value) + " +- " + fmt(c.ell.std_error) + ", rate change " +
                fmt(c.ell_measure_change.value) + " +- " + fmt(c.ell_measure_change.std_error);
  ell.data = {{"weighted", to_json(c.ell)}, {"rate_change", to_json(c.ell_measure_change)}};
  return {eu, ell};
}

Check length_per_color(const CrtScalingReport& r, const CrtConstants& c) {
  Check k;
  k.name = "length_per_color_n" + std::to_string(r.n);
  k.passed = within_combined_se(r.length_per_color.value, r.length_per_color.std_error, c.ell.value,
                                c.ell.std_error);
  k.summary = "mean |G_n|/n = " + fmt(r.length_per_color.value) + " +- " +
              fmt(r.length_per_color.std_error) + " vs ell = " + fmt(c.ell.value) + " +- " +
              fmt(c.ell.std_error);
  k.data = {{"n", r.n}, {"mean", to_json(r.length_per_color)}, {"ell", to_json(c.ell)}};
  return k;
}

Check max_height(const CrtScalingReport& r, const CrtConstants& c, const Estimate& sup_e,
                 double band) {
  double target = 2.0 * c.EUstar.value / std::sqrt(c.sigma_hat_sq) * sup_e.value;
  double rel = r.max_height.value / target - 1.0;
  Check k;
  k.name = "max_height_n" + std::to_string(r.n);
  k.passed = std::abs(rel) <= band;
  k.summary = "mean max height / sqrt(n) = " + fmt(r.max_height.value) + " vs " + fmt(target) +
              " (relative " + fmt(rel) + ")";
  k.data = {{"n", r.n},
            {"mean", to_json(r.max_height)},
            {"target", target},
            {"sup_excursion", to_json(sup_e)},
            {"band", band}};
  return k;
}

Check deviation_trend(const std::vector<CrtScalingReport>& reports) {
  bool ok = true;
  json rows = json::array();
  for (std::size_t i = 0; i < reports.size(); ++i) {
    if (i > 0 && !(reports[i].sup_deviation.value < reports[i - 1].sup_deviation.value)) ok = false;
    rows.push_back({{"n", reports[i].n},
                    {"sup_deviation", to_json(reports[i].sup_deviation)},
                    {"correlation", to_json(reports[i].correlation)}});
  }
  Check k;
  k.name = "sup_deviation_decreasing";
  k.passed = ok;
  k.summary = ok ? "decreasing in n" : "not decreasing in n";
  k.data = {{"rows", rows}};
  return k;
}

Check prob_N_internal(const NetworkModel& m, std::size_t samples, const McConfig& mc) {
  struct Obs {
    int N;
    double w;
  };
  auto obs = mc_collect<Obs>(samples, mc, kTagBallN, [&](RngStream& rng, std::size_t) {
    LocalBall b = sample_local_ball(m, 0, rng);
    return Obs{b.N, b.weight};
  });
  ProbNTable t = prob_N_table(m.params, m.tilt.zeta);
  std::vector<int> cats;
  std::vector<double> w;
  for (const auto& o : obs) {
    cats.push_back(o.N - 1);
    w.push_back(o.w);
  }
  TestResult r;
  if (m.tilt.zeta <= 1.0) {
    r = chi2_gof(tabulate(cats), t.probs);
  } else {
    r = weighted_gof(cats, w, t.probs);
  }
  return from_test("prob_N_vs_local_ball", r,
                   {{"samples", samples}, {"weighted", m.tilt.zeta > 1.0}, {"prob_N", t.probs}});
}

Check prob_N_finite(const NetworkModel& m, std::size_t n, std::size_t networks, std::size_t points,
                    const McConfig& mc) {
  auto views = finite_views(m, n, networks, points, mc, kTagFiniteN);
  std::vector<int> cats;
  for (const auto& v : views) cats.push_back(v.N - 1);
  ProbNTable t = prob_N_table(m.params, m.tilt.zeta);
  ProbNTable lit = prob_N_table(m.params, m.tilt.zeta, ProbNForm::Literal);
  auto counts = tabulate(cats);
  TestResult r = chi2_gof(counts, t.probs);
  TestResult rl = chi2_gof(counts, lit.probs);
  return from_test("prob_N_vs_finite_n" + std::to_string(n), r,
                   {{"n", n},
                    {"networks", networks},
                    {"points_per_network", points},
                    {"counts", counts},
                    {"prob_N", t.probs},
                    {"forward_marks_diagnostic", to_json(rl)}});
}

Check prob_N_critical(const ModelParams& critical) {
  ProbNTable t = prob_N_table(critical, 1.0);
  NuCircPmf nu = nu_circ_pmf(critical, 1e-15);
  double total = 0.0;
  for (double x : nu.probs) total += x;
  double err = 0.0;
  for (std::size_t i = 0; i < std::min(t.probs.size(), nu.probs.size()); ++i)
    err = std::max(err, std::abs(t.probs[i] - nu.probs[i] / total));
  TiltSolution tilt = zeta_tilt(critical);
  Check k;
  k.name = "prob_N_equals_nu_circ_at_zeta_1";
  k.passed = err <= 1e-12 && std::abs(tilt.zeta - 1.0) <= 1e-8;
  k.summary = "max |prob_N - nu_circ| = " + fmt(err) + ", zeta - 1 = " + fmt(tilt.zeta - 1.0);
  k.data = {{"max_abs_difference", err}, {"zeta", tilt.zeta}, {"alpha", critical.alpha}, {"beta", critical.beta}, {"mu", critical.mu}};
  return k;
}

Check time_since_mutation(const NetworkModel& m, std::size_t n, std::size_t networks,
                          std::size_t points, std::size_t mc_samples, const McConfig& mc) {
  const std::vector<double> edges{0.0, 0.125, 0.25, 0.5, 1.0, 2.0, 4.0, 8.0};
  const std::size_t B = edges.size();  // last bin is [8, inf)
  auto bin = [&](double t) {
    std::size_t b = static_cast<std::size_t>(std::upper_bound(edges.begin(), edges.end(), t) -
                                             edges.begin());
    return b - 1;
  };
  const double z = m.tilt.zeta;
  NuCircPmf nu = nu_circ_pmf(m.params, 1e-12);
  const std::size_t K = nu.probs.size();
  // Cell weights nu(k) E_k[z^M] E_k[1{T_0 in I} z^M] / reversal factor.
  std::vector<double> probs(K * B, 0.0);
  for (std::size_t i = 0; i < K; ++i) {
    int k = static_cast<int>(i) + 1;
    double front = nu.probs[i] * pgf_from_state(m.params, k, z).mid() /
                   reversal_mark_factor(m.params, k, z);
    struct Acc {
      std::vector<double> s;
      void merge(const Acc& o) {
        if (s.empty()) s.assign(o.s.size(), 0.0);
        for (std::size_t j = 0; j < o.s.size(); ++j) s[j] += o.s[j];
      }
    };
    auto acc = mc_reduce<Acc>(mc_samples, mc, kTagSinceMC ^ (static_cast<std::uint64_t>(k) << 16),
                              [&](RngStream& rng, std::size_t, std::size_t count) {
      Acc a;
      a.s.assign(B, 0.0);
      for (std::size_t j = 0; j < count; ++j) {
        TrajectoryStats s = simulate_stats(m.params, k, rng);
        a.s[bin(s.T)] += std::pow(z, static_cast<double>(s.M));
      }
      return a;
    });
    for (std::size_t b = 0; b < B; ++b)
      probs[i * B + b] = front * acc.s[b] / static_cast<double>(mc_samples);
  }
  double total = 0.0;
  for (double x : probs) total += x;
  for (double& x : probs) x /= total;
  auto views = finite_views(m, n, networks, points, mc, kTagSinceNet);
  std::vector<double> counts(K * B, 0.0);
  for (const auto& v : views) {
    std::size_t i = std::min(static_cast<std::size_t>(v.N), K) - 1;
    counts[i * B + bin(v.since)] += 1.0;
  }
  return from_test("time_since_mutation_joint_law", chi2_gof(counts, probs),
                   {{"n", n}, {"bins", edges}, {"mc_samples_per_state", mc_samples}});
}

Check focal_outdegree(const NetworkModel& m, std::size_t samples, std::size_t n,
                      std::size_t networks, std::size_t points, const McConfig& mc) {
  struct Obs {
    int deg;
    double w;
  };
  auto ball = mc_collect<Obs>(samples, mc, kTagFocalDeg, [&](RngStream& rng, std::size_t) {
    LocalBall b = sample_local_ball(m, 0, rng);
    return Obs{b.vertices[0].outdegree, b.weight};
  });
  auto views = finite_views(m, n, networks, points, mc, kTagFocalNet);
  std::vector<int> ca, cb;
  std::vector<double> wa, wb;
  for (const auto& o : ball) {
    ca.push_back(o.deg);
    wa.push_back(o.w);
  }
  for (const auto& v : views) {
    cb.push_back(v.outdegree);
    wb.push_back(1.0);
  }
  TestResult r = m.tilt.zeta <= 1.0 ? chi2_two_sample(tabulate(ca), tabulate(cb))
                                    : weighted_two_sample(ca, wa, cb, wb);
  return from_test("focal_outdegree_vs_finite_n" + std::to_string(n), r,
                   {{"ball_samples", samples}, {"n", n}, {"points", views.size()}});
}

}  // namespace phylonet::verify
