#include <algorithm>
#include <cmath>
#include <sstream>

#include "phylonet/verify.hpp"

namespace phylonet::verify {

namespace {

enum : std::uint64_t {
  kTagTreeCycle = 0x401,
  kTagTreeReject = 0x402,
  kTagGwSizes = 0x403,
  kTagTilted = 0x404,
  kTagDirect = 0x405,
  kTagMetric = 0x406,
  kTagDecor = 0x407,
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

double root_distance(const GluedNetwork& g, const std::vector<double>& d, const PointRef& x) {
  auto [a, b] = g.bracket(x);
  double h = g.height(x);
  return std::min(d[a] + (h - g.node_time(a)), d[b] + (g.node_time(b) - h));
}

}  // namespace

Check tree_methods(const NetworkModel& m, std::size_t n, std::size_t samples, const McConfig& mc) {
  auto shape = [n](const GenealogyTree& t) {
    int md = *std::max_element(t.outdegrees().begin(), t.outdegrees().end());
    return static_cast<int>(t.height() * n) + md;
  };
  auto a = mc_collect<int>(samples, mc, kTagTreeCycle, [&](RngStream& rng, std::size_t) {
    return shape(sample_genealogy_tree(m.offspring, n, rng, TreeMethod::Cycle));
  });
  auto b = mc_collect<int>(samples, mc, kTagTreeReject, [&](RngStream& rng, std::size_t) {
    return shape(sample_genealogy_tree(m.offspring, n, rng, TreeMethod::Rejection));
  });
  int top = static_cast<int>(n * n);
  return from_test("tree_cycle_vs_rejection_n" + std::to_string(n),
                   chi2_two_sample(tabulate(a, top), tabulate(b, top)),
                   {{"n", n}, {"samples_per_side", samples}});
}

Check dwass_small(const NetworkModel& m, std::size_t n_max, std::size_t samples, const McConfig& mc) {
  // Sizes of i.i.d. GW(Mhat) trees, stopped once they exceed n_max.
  auto sizes = mc_collect<int>(samples, mc, kTagGwSizes, [&](RngStream& rng, std::size_t) {
    long long pile = 1;
    std::size_t count = 0;
    while (pile > 0 && count <= n_max) {
      pile += static_cast<long long>(sample_from_cdf(m.offspring.cdf, rng)) - 1;
      ++count;
    }
    return pile == 0 ? static_cast<int>(count) : static_cast<int>(n_max) + 1;
  });
  auto freq = tabulate(sizes, static_cast<int>(n_max) + 1);
  bool ok = true;
  json rows = json::array();
  double N = static_cast<double>(samples);
  for (std::size_t n = 1; n <= n_max; ++n) {
    double exact = gw_size_probability(m.offspring, n).value;
    double emp = freq[n] / N;
    double se = std::sqrt(exact * (1.0 - exact) / N);
    bool good = std::abs(emp - exact) <= 3.0 * se;
    ok = ok && good;
    rows.push_back({{"n", n}, {"exact", exact}, {"empirical", emp}, {"std_error", se}, {"agree", good}});
  }
  Check c;
  c.name = "dwass_small_n";
  c.passed = ok;
  c.summary = "n = 1.." + std::to_string(n_max) + " within 3 standard errors: " + (ok ? "yes" : "no");
  c.data = {{"rows", rows}, {"samples", samples}};
  return c;
}

Check dwass_asymptotic(const NetworkModel& m, const std::vector<std::size_t>& ns, double band) {
  bool monotone = true;
  double prev = std::numeric_limits<double>::infinity();
  double last = 0.0;
  json rows = json::array();
  for (std::size_t n : ns) {
    SizeProbability sp = gw_size_probability(m.offspring, n);
    double ratio = sp.value / size_asymptotic(m.tilt.sigma_hat_sq, n);
    double dev = std::abs(ratio - 1.0);
    if (!(dev < prev)) monotone = false;
    prev = dev;
    last = ratio;
    rows.push_back({{"n", n}, {"probability", sp.value}, {"error_bar", sp.error_bar}, {"ratio", ratio}});
  }
  Check c;
  c.name = "dwass_asymptotic_ratio";
  c.passed = monotone && std::abs(last - 1.0) <= band;
  c.summary = "ratio at n=" + std::to_string(ns.back()) + " is " + fmt(last) +
              (monotone ? ", monotone toward 1" : ", not monotone");
  c.data = {{"rows", rows}, {"band", band}};
  return c;
}

std::vector<Check> samplers_agree(const NetworkModel& m, std::size_t n, std::size_t samples,
                                  const McConfig& mc) {
  struct Obs {
    double length;
    int lineages;
  };
  auto observe = [](const GluedNetwork& g) {
    int l = 0;
    for (const auto& d : g.decorations()) l += static_cast<int>(d.lineages().size());
    return Obs{g.total_length(), l};
  };
  auto a = mc_collect<Obs>(samples, mc, kTagTilted, [&](RngStream& rng, std::size_t) {
    return observe(sample_network(m, n, rng, NetworkMethod::Tilted));
  });
  auto b = mc_collect<Obs>(samples, mc, kTagDirect, [&](RngStream& rng, std::size_t) {
    return observe(sample_network(m, n, rng, NetworkMethod::Direct));
  });
  std::vector<double> la, lb;
  std::vector<int> ca, cb;
  for (const auto& o : a) {
    la.push_back(o.length);
    ca.push_back(o.lineages);
  }
  for (const auto& o : b) {
    lb.push_back(o.length);
    cb.push_back(o.lineages);
  }
  int top = std::max(*std::max_element(ca.begin(), ca.end()), *std::max_element(cb.begin(), cb.end()));
  json info = {{"n", n}, {"samples_per_side", samples}};
  return {from_test("tilted_vs_direct_length_ks", ks_two_sample(la, lb), info),
          from_test("tilted_vs_direct_lineages_chi2",
                    chi2_two_sample(tabulate(ca, top), tabulate(cb, top)), info)};
}

std::vector<Check> network_metric(const NetworkModel& m, std::size_t n, std::size_t networks,
                                  std::size_t points, const McConfig& mc) {
  struct Res {
    double height_err = 0.0, length_err = 0.0, sym_err = 0.0, tri_viol = 0.0;
    bool counts = true;
  };
  auto res = mc_items<Res>(networks, mc, kTagMetric, [&](RngStream& rng, std::size_t) {
    GluedNetwork g = sample_network(m, n, rng);
    Res r;
    CompensatedSum L;
    std::size_t events = 0, edges = 0;
    for (const auto& d : g.decorations()) {
      L.add(d.trajectory().length());
      events += d.trajectory().events().size();
      std::size_t births = 0, coal = 0;
      for (const auto& e : d.trajectory().events()) {
        births += e.kind == EventKind::Birth;
        coal += e.kind == EventKind::Coalescence;
      }
      edges += 1 + 2 * births + coal;
    }
    r.length_err = std::abs(g.total_length() - L.value()) / std::max(1.0, L.value());
    r.counts = g.node_count() == 1 + events && g.edge_count() == edges;
    auto droot = g.distances_from(PointRef{0, 0, 0.0});
    for (std::size_t i = 0; i < points; ++i) {
      PointRef x = uniform_point(g, rng);
      double h = g.height(x);
      r.height_err = std::max(r.height_err, std::abs(root_distance(g, droot, x) - h) / std::max(1.0, h));
    }
    for (std::size_t i = 0; i < std::min<std::size_t>(points, 5); ++i) {
      PointRef a = uniform_point(g, rng), b = uniform_point(g, rng), c = uniform_point(g, rng);
      double ab = distance(g, a, b), ba = distance(g, b, a);
      double bc = distance(g, b, c), ac = distance(g, a, c);
      r.sym_err = std::max(r.sym_err, std::abs(ab - ba) / std::max(1.0, ab));
      r.tri_viol = std::max(r.tri_viol, (ac - ab - bc) / std::max(1.0, ac));
    }
    return r;
  });
  Res worst;
  for (const Res& r : res) {
    worst.height_err = std::max(worst.height_err, r.height_err);
    worst.length_err = std::max(worst.length_err, r.length_err);
    worst.sym_err = std::max(worst.sym_err, r.sym_err);
    worst.tri_viol = std::max(worst.tri_viol, r.tri_viol);
    worst.counts = worst.counts && r.counts;
  }
  // Floating-point sums of time differences: equality up to rounding.
  const double tol = 1e-9;
  auto mk = [&](const std::string& name, bool ok, const std::string& s, json d) {
    Check c;
    c.name = name;
    c.passed = ok;
    c.summary = s;
    c.data = std::move(d);
    return c;
  };
  json info = {{"n", n}, {"networks", networks}, {"points", points}, {"tolerance", tol}};
  return {
      mk("root_distance_equals_height", worst.height_err <= tol,
         "max relative error " + fmt(worst.height_err), info),
      mk("total_length_equals_sum_of_L", worst.length_err <= tol,
         "max relative error " + fmt(worst.length_err), info),
      mk("metric_symmetry_triangle", worst.sym_err <= tol && worst.tri_viol <= tol,
         "symmetry error " + fmt(worst.sym_err) + ", triangle violation " + fmt(worst.tri_viol), info),
      mk("graph_counts", worst.counts, "nodes = 1 + events, edges = sum(1 + 2 births + coalescences)",
         info)};
}

Check decoration_consistency(const NetworkModel& m, std::size_t samples, const McConfig& mc) {
  auto bad = mc_collect<int>(samples, mc, kTagDecor, [&](RngStream& rng, std::size_t) {
    int k = static_cast<int>(sample_from_cdf(m.offspring.cdf, rng));
    ColorNetwork d = decorate(m, k, rng);
    const auto& x = d.trajectory();
    if (d.mutation_points().size() != static_cast<std::size_t>(k) ||
        x.mutation_count() != static_cast<std::size_t>(k))
      return 1;
    auto times = x.mutation_times();
    for (std::size_t i = 0; i < times.size(); ++i)
      if (d.mutation_points()[i].time != times[i]) return 1;
    auto st = x.states();
    double prev = x.start_time();
    for (std::size_t i = 0; i < x.events().size(); ++i) {
      double mid = 0.5 * (prev + x.events()[i].time);
      if (d.alive_at(mid) != static_cast<std::size_t>(st[i])) return 1;
      prev = x.events()[i].time;
    }
    if (std::abs(d.length() - x.length()) > 1e-9 * std::max(1.0, x.length())) return 1;
    return 0;
  });
  int failures = 0;
  for (int b : bad) failures += b;
  Check c;
  c.name = "decoration_consistency";
  c.passed = failures == 0;
  c.summary = std::to_string(failures) + " inconsistent decorations of " + std::to_string(samples);
  c.data = {{"samples", samples}, {"failures", failures}};
  return c;
}

}  // namespace phylonet::verify
