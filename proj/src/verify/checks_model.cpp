#include <algorithm>
#include <cmath>
#include <sstream>

#include "phylonet/verify.hpp"

namespace phylonet::verify {

namespace {

enum : std::uint64_t {
  kTagChangeRaw = 0x201,
  kTagChangeTilted = 0x202,
  kTagXMutPaste = 0x203,
  kTagXMutRaw = 0x204,
  kTagMeanM = 0x205,
};

std::string fmt(double x) {
  std::ostringstream s;
  s.precision(6);
  s << x;
  return s.str();
}

}  // namespace

json to_json(const TestResult& t) {
  return json{{"statistic", t.statistic}, {"p_value", t.p_value}, {"dof", t.dof}};
}

json to_json(const Check& c) {
  return json{{"name", c.name}, {"passed", c.passed}, {"summary", c.summary}, {"data", c.data}};
}

Check measure_change(const ModelParams& p, double s, std::size_t samples, const McConfig& mc) {
  auto raw = mc_reduce<MeanAccumulator>(samples, mc, kTagChangeRaw,
                                        [&](RngStream& rng, std::size_t, std::size_t count) {
    MeanAccumulator a;
    for (std::size_t i = 0; i < count; ++i) {
      TrajectoryStats st = simulate_stats(p, 1, rng);
      a.add(st.T * std::pow(s, static_cast<double>(st.M)));
    }
    return a;
  });
  ModelParams q(p.alpha, p.beta, s * p.mu);
  auto tilted = mc_reduce<MeanAccumulator>(samples, mc, kTagChangeTilted,
                                           [&](RngStream& rng, std::size_t, std::size_t count) {
    MeanAccumulator a;
    for (std::size_t i = 0; i < count; ++i) {
      TrajectoryStats st = simulate_stats(q, 1, rng);
      a.add(st.T * std::exp((s - 1.0) * p.mu * st.L));
    }
    return a;
  });
  Check c;
  c.name = "measure_change_s" + fmt(s);
  c.passed = intervals_overlap(raw.mean(), raw.std_error(), tilted.mean(), tilted.std_error());
  c.summary = "E[T s^M] = " + fmt(raw.mean()) + " +- " + fmt(raw.std_error()) +
              ", E_{s mu}[T e^{(s-1) mu L}] = " + fmt(tilted.mean()) + " +- " +
              fmt(tilted.std_error());
  c.data = {{"s", s},
            {"direct", to_json(Estimate{raw.mean(), raw.std_error(), raw.count(), {}})},
            {"changed_rate", to_json(Estimate{tilted.mean(), tilted.std_error(), tilted.count(), {}})}};
  return c;
}

std::vector<Check> x_mut_view(const ModelParams& p, std::size_t samples, const McConfig& mc) {
  struct View {
    int K;
    double T;
    int M;
  };
  auto pasted = mc_collect<View>(samples, mc, kTagXMutPaste, [&](RngStream& rng, std::size_t) {
    MarkedTrajectory x = sample_x_mut(p, rng);
    auto st = x.states();
    const auto& ev = x.events();
    std::size_t i = 0;
    while (ev[i].time < 0.0) ++i;
    return View{st[i], x.duration(), static_cast<int>(x.mutation_count())};
  });
  // Cap for the M-proportional acceptance: beyond it the acceptance is
  // clipped to 1, which biases the law by at most P(M > cap).
  OffspringPmf pmf = offspring_pmf(p, 400);
  int cap = 1;
  double below = 0.0;
  for (int m = 0; m <= 400; ++m) {
    below += pmf.probs[static_cast<std::size_t>(m)];
    if (1.0 - below <= 1e-12 && m >= 1) {
      cap = m;
      break;
    }
    cap = m;
  }
  auto raw = mc_collect<View>(samples, mc, kTagXMutRaw, [&](RngStream& rng, std::size_t) {
    for (;;) {
      MarkedTrajectory x = simulate_trajectory(p, 1, rng);
      double M = static_cast<double>(x.mutation_count());
      if (M == 0.0 || rng.uniform() * static_cast<double>(cap) >= M) continue;
      // Uniform mutation of the accepted path.
      std::size_t pick = rng.below(x.mutation_count());
      auto st = x.states();
      const auto& ev = x.events();
      std::size_t seen = 0;
      for (std::size_t i = 0; i < ev.size(); ++i) {
        if (ev[i].kind != EventKind::Mutation) continue;
        if (seen++ == pick) return View{st[i], x.duration(), static_cast<int>(M)};
      }
    }
  });
  std::vector<int> ka, kb, ma, mb;
  std::vector<double> ta, tb;
  for (const View& v : pasted) {
    ka.push_back(v.K);
    ta.push_back(v.T);
    ma.push_back(v.M);
  }
  for (const View& v : raw) {
    kb.push_back(v.K);
    tb.push_back(v.T);
    mb.push_back(v.M);
  }
  int kmax = std::max(*std::max_element(ka.begin(), ka.end()), *std::max_element(kb.begin(), kb.end()));
  int mmax = std::max(*std::max_element(ma.begin(), ma.end()), *std::max_element(mb.begin(), mb.end()));
  TestResult tk = chi2_two_sample(tabulate(ka, kmax), tabulate(kb, kmax));
  TestResult tt = ks_two_sample(ta, tb);
  TestResult tm = chi2_two_sample(tabulate(ma, mmax), tabulate(mb, mmax));
  std::vector<Check> out;
  auto add = [&](const std::string& name, const TestResult& t) {
    Check c;
    c.name = name;
    c.passed = t.passed();
    c.summary = "p = " + fmt(t.p_value);
    c.data = {{"test", to_json(t)}, {"samples_per_side", samples}, {"acceptance_cap", cap}};
    out.push_back(std::move(c));
  };
  add("x_mut_K_chi2", tk);
  add("x_mut_duration_ks", tt);
  add("x_mut_M_chi2", tm);
  return out;
}

Check expected_M_mc(const ModelParams& p, std::size_t samples, const McConfig& mc) {
  auto acc = mc_reduce<MeanAccumulator>(samples, mc, kTagMeanM,
                                        [&](RngStream& rng, std::size_t, std::size_t count) {
    MeanAccumulator a;
    for (std::size_t i = 0; i < count; ++i)
      a.add(static_cast<double>(simulate_stats(p, 1, rng).M));
    return a;
  });
  CertifiedValue em = expected_M(p);
  Check c;
  c.name = "expected_M_monte_carlo";
  c.passed = within_combined_se(acc.mean(), acc.std_error(), em.mid(), 0.5 * em.width());
  c.summary = "MC " + fmt(acc.mean()) + " +- " + fmt(acc.std_error()) + " vs series " + fmt(em.mid());
  c.data = {{"monte_carlo", to_json(Estimate{acc.mean(), acc.std_error(), acc.count(), {}})},
            {"series", to_json(em)}};
  return c;
}

}  // namespace phylonet::verify
