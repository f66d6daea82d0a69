#include "phylonet/limits.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

#include "phylonet/errors.hpp"
#include "phylonet/kernels.hpp"
#include "phylonet/model.hpp"

namespace phylonet {

namespace {

// Stream tags for the Monte Carlo jobs of this module.
enum : std::uint64_t {
  kTagEUDirect = 0x101,
  kTagEUDecomp = 0x102,
  kTagEllChange = 0x103,
  kTagExcursion = 0x104,
  kTagScaling = 0x105,
};

Estimate to_estimate(const MeanAccumulator& a) {
  return Estimate{a.mean(), a.std_error(), a.count(), {}};
}

Estimate to_estimate(const RatioAccumulator& a, bool weighted) {
  Estimate e{a.value(), a.std_error(), a.count(), {}};
  if (weighted && a.effective_sample_size() < kLowEssFraction * static_cast<double>(a.count()))
    e.flags.push_back("low_ess");
  return e;
}

struct DirectAcc {
  RatioAccumulator eu, ell;
  void merge(const DirectAcc& o) {
    eu.merge(o.eu);
    ell.merge(o.ell);
  }
};

struct DecompAcc {
  MeanAccumulator reversed, literal;
  void merge(const DecompAcc& o) {
    reversed.merge(o.reversed);
    literal.merge(o.literal);
  }
};

struct ChangeAcc {
  MeanAccumulator value;
  RatioAccumulator weights;
  void merge(const ChangeAcc& o) {
    value.merge(o.value);
    weights.merge(o.weights);
  }
};

}  // namespace

double reversal_mark_factor(const ModelParams& params, int k, double zeta) {
  double f = 1.0;
  for (int j = 1; j <= k; ++j) {
    double p = params.mu / params.rho(static_cast<std::size_t>(j));
    f *= 1.0 - p + p * zeta;
  }
  return f;
}

CrtConstants crt_constants(const ModelParams& params, std::size_t n_samples, const McConfig& cfg) {
  if (n_samples == 0) throw std::invalid_argument("crt_constants: n_samples must be positive");
  CrtConstants out;
  TiltSolution tilt = zeta_tilt(params);
  out.zeta = tilt.zeta;
  out.E_zetaM = tilt.E_zetaM;
  out.sigma_hat_sq = tilt.sigma_hat_sq;
  out.expected_M = expected_M(params).mid();
  const double z = tilt.zeta;
  const bool weighted = z > 1.0;

  auto direct = mc_reduce<DirectAcc>(n_samples, cfg, kTagEUDirect,
                                     [&](RngStream& rng, std::size_t, std::size_t count) {
    DirectAcc acc;
    for (std::size_t i = 0; i < count; ++i) {
      MarkedTrajectory path = simulate_trajectory(params, 1, rng);
      double w = std::pow(z, static_cast<double>(path.mutation_count()));
      double st = 0.0;
      for (double t : path.mutation_times()) st += t;
      acc.eu.add(st * w, w);
      acc.ell.add(path.length() * w, w);
    }
    return acc;
  });
  out.EUstar = to_estimate(direct.eu, weighted);
  out.ell = to_estimate(direct.ell, weighted);

  // Decomposition: K ~ nu_circ, past path from K, future factor E_{K-1}[z^M].
  NuCircPmf nu = nu_circ_pmf(params, 1e-15);
  auto nu_cdf = cumulative(nu.probs);
  std::vector<double> future(nu.probs.size()), factor(nu.probs.size());
  for (std::size_t i = 0; i < nu.probs.size(); ++i) {
    int k = static_cast<int>(i) + 1;
    future[i] = pgf_from_state(params, k - 1, z).mid();
    factor[i] = reversal_mark_factor(params, k, z);
  }
  auto decomp = mc_reduce<DecompAcc>(n_samples, cfg, kTagEUDecomp,
                                     [&](RngStream& rng, std::size_t, std::size_t count) {
    DecompAcc acc;
    for (std::size_t i = 0; i < count; ++i) {
      std::size_t idx = sample_from_cdf(nu_cdf, rng);
      TrajectoryStats s = simulate_stats(params, static_cast<int>(idx) + 1, rng);
      double base = s.T * std::pow(z, static_cast<double>(s.M)) * future[idx];
      acc.reversed.add(base / factor[idx]);
      acc.literal.add(base);
    }
    return acc;
  });
  const double pre = z * out.expected_M / out.E_zetaM;
  out.EUstar_decomposition = to_estimate(decomp.reversed);
  out.EUstar_literal = to_estimate(decomp.literal);
  for (Estimate* e : {&out.EUstar_decomposition, &out.EUstar_literal}) {
    e->value *= pre;
    e->std_error *= pre;
  }
  out.EUstar_literal.flags.push_back("diagnostic");

  // Mutation rate changed to z mu: E[L z^M] = E_{z mu}[L exp((z-1) mu L)].
  ModelParams changed(params.alpha, params.beta, z * params.mu);
  auto change = mc_reduce<ChangeAcc>(n_samples, cfg, kTagEllChange,
                                     [&](RngStream& rng, std::size_t, std::size_t count) {
    ChangeAcc acc;
    for (std::size_t i = 0; i < count; ++i) {
      TrajectoryStats s = simulate_stats(changed, 1, rng);
      double w = std::exp((z - 1.0) * params.mu * s.L);
      acc.value.add(s.L * w / out.E_zetaM);
      acc.weights.add(s.L * w, w);
    }
    return acc;
  });
  out.ell_measure_change = to_estimate(change.value);
  if (change.weights.effective_sample_size() < kLowEssFraction * static_cast<double>(n_samples))
    out.ell_measure_change.flags.push_back("low_ess");

  double sigma = std::sqrt(out.sigma_hat_sq);
  double c = sigma / (2.0 * out.EUstar.value);
  out.C = Estimate{c, c * out.EUstar.std_error / out.EUstar.value, n_samples, out.EUstar.flags};
  return out;
}

SizeProbability gw_size_probability(const TiltedOffspring& off, std::size_t n, double tol) {
  if (n == 0) throw std::invalid_argument("gw_size_probability: n must be >= 1");
  // Y_i = sum of i offspring counts; S_n = -1 iff Y_n = n - 1. Cells above
  // n - 1 can never come back, so they are dropped exactly.
  const double cut = 1e-16 / static_cast<double>(n);
  std::vector<double> cur(n, 0.0), next(n, 0.0);
  cur[0] = 1.0;
  std::size_t hi = 0;  // highest nonzero cell
  double discarded = 0.0;
  const std::size_t P = off.probs.size();
  for (std::size_t i = 0; i < n; ++i) {
    std::fill(next.begin(), next.end(), 0.0);
    for (std::size_t m = 0; m < P && m < n; ++m) {
      double pm = off.probs[m];
      if (pm == 0.0) continue;
      std::size_t len = std::min(hi + 1, n - m);
      kernels::axpy(pm, cur.data(), next.data() + m, len);
    }
    hi = 0;
    for (std::size_t y = 0; y < n; ++y) {
      if (next[y] == 0.0) continue;
      if (next[y] < cut) {
        discarded += next[y];
        next[y] = 0.0;
      } else {
        hi = y;
      }
    }
    std::swap(cur, next);
  }
  SizeProbability out;
  double dn = static_cast<double>(n);
  out.value = cur[n - 1] / dn;
  out.error_bar = (discarded + dn * off.tail) / dn;
  out.flagged = out.error_bar > tol * std::max(out.value, 1e-300);
  return out;
}

double size_asymptotic(double sigma_sq, std::size_t n) {
  double dn = static_cast<double>(n);
  return std::pow(dn, -1.5) / std::sqrt(2.0 * M_PI * sigma_sq);
}

Estimate excursion_sup_oracle(std::size_t steps, std::size_t replicates, const McConfig& cfg) {
  if (steps < 2 || steps % 2 != 0)
    throw std::invalid_argument("excursion_sup_oracle: steps must be even and >= 2");
  const std::size_t m = steps / 2;
  auto sups = mc_items<double>(replicates, cfg, kTagExcursion, [&](RngStream& rng, std::size_t) {
    // Uniform arrangement of m up-steps and m + 1 down-steps.
    const std::size_t N = steps + 1;
    std::vector<signed char> x(N);
    std::size_t ups = m, left = N;
    for (std::size_t i = 0; i < N; ++i, --left) {
      bool up = rng.below(left) < ups;
      x[i] = up ? 1 : -1;
      if (up) --ups;
    }
    // Cycle lemma: rotating to just after the first minimum gives a path
    // that stays >= 0 until its final step.
    long long s = 0, best = 0;
    std::size_t arg = 0;
    for (std::size_t i = 0; i < N; ++i) {
      s += x[i];
      if (s < best) {
        best = s;
        arg = i + 1;
      }
    }
    long long h = 0, top = 0;
    for (std::size_t j = 0; j < N; ++j) {
      h += x[(arg + j) % N];
      top = std::max(top, h);
    }
    return static_cast<double>(top) / std::sqrt(static_cast<double>(steps));
  });
  MeanAccumulator acc;
  for (double v : sups) acc.add(v);
  return to_estimate(acc);
}

CrtScalingReport verify_crt_scaling(const NetworkModel& model, std::size_t n,
                                    std::size_t replicates, double EUstar, const McConfig& cfg,
                                    std::size_t grid_size) {
  struct Rep {
    double length, height, deviation, corr;
  };
  const double sn = std::sqrt(static_cast<double>(n));
  auto reps = mc_items<Rep>(replicates, cfg, kTagScaling ^ (static_cast<std::uint64_t>(n) << 20),
                            [&](RngStream& rng, std::size_t) {
    GluedNetwork g = sample_network(model, n, rng);
    Rep r{};
    r.length = g.total_length() / static_cast<double>(n);
    double top = 0.0;
    for (std::size_t i = 0; i < g.node_count(); ++i) top = std::max(top, g.node_time(i));
    r.height = top / sn;
    // Within the time slot of color v the contour sweeps exactly the heights
    // of v's decoration, so the sup is attained at its extreme heights.
    double dev = 0.0;
    for (std::size_t v = 0; v < g.colors(); ++v) {
      const auto& d = g.decorations()[v];
      double shift = g.color_root_time(v) - d.root_time();
      double lo = g.color_root_time(v), hi = lo;
      for (const auto& l : d.lineages()) hi = std::max(hi, shift + l.end_time);
      double target = EUstar * static_cast<double>(g.tree().depth(v));
      dev = std::max({dev, std::abs(hi - target), std::abs(lo - target)});
    }
    r.deviation = dev / sn;
    HeightProcess hp = contour(g, rng, grid_size);
    MeanAccumulator hx, hy;
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    std::vector<double> y(grid_size);
    for (std::size_t i = 0; i < grid_size; ++i) {
      std::size_t c = std::min(static_cast<std::size_t>(hp.t[i] * static_cast<double>(n)), n - 1);
      y[i] = static_cast<double>(g.tree().depth(c));
      hx.add(hp.h[i]);
      hy.add(y[i]);
    }
    for (std::size_t i = 0; i < grid_size; ++i) {
      double a = hp.h[i] - hx.mean(), b = y[i] - hy.mean();
      sxy += a * b;
      sxx += a * a;
      syy += b * b;
    }
    r.corr = (sxx > 0 && syy > 0) ? sxy / std::sqrt(sxx * syy) : 0.0;
    return r;
  });
  MeanAccumulator len, hgt, dev, cor;
  for (const Rep& r : reps) {
    len.add(r.length);
    hgt.add(r.height);
    dev.add(r.deviation);
    cor.add(r.corr);
  }
  CrtScalingReport out;
  out.n = n;
  out.replicates = replicates;
  out.length_per_color = to_estimate(len);
  out.max_height = to_estimate(hgt);
  out.sup_deviation = to_estimate(dev);
  out.correlation = to_estimate(cor);
  return out;
}

namespace {

WeightedColor pasted_color(const ModelParams& params, double zeta, const std::vector<double>& nu_cdf,
                           RngStream& rng, bool spinal, std::uint64_t max_retries) {
  for (std::uint64_t attempt = 0; attempt < max_retries; ++attempt) {
    int K = static_cast<int>(sample_from_cdf(nu_cdf, rng)) + 1;
    MarkedTrajectory past = simulate_trajectory(params, K, rng);
    int k2 = spinal ? K - 1 : K;
    MarkedTrajectory fut = k2 > 0 ? simulate_trajectory(params, k2, rng) : MarkedTrajectory();
    MarkedTrajectory path = paste_back_to_back(past, fut, params, rng, EventKind::Mutation);
    ColorNetwork net = realize_network(path, rng);
    double M = static_cast<double>(net.mutation_points().size());
    double weight = 1.0;
    if (zeta < 1.0) {
      if (!rng.bernoulli(std::pow(zeta, M))) continue;
    } else if (zeta > 1.0) {
      weight = std::pow(zeta, M);
    }
    if (spinal) {
      const auto& mp = net.mutation_points();
      auto it = std::find_if(mp.begin(), mp.end(), [](const MutationPoint& p) { return p.time == 0.0; });
      if (it == mp.end()) throw std::logic_error("spinal network without a mutation at time 0");
      net.set_focal_point({it->lineage, 0.0});
    } else {
      auto alive = net.alive_lineages_at(0.0);
      net.set_focal_point({alive[rng.below(alive.size())], 0.0});
    }
    return WeightedColor{std::move(net), weight, K};
  }
  throw RetryExhausted("biased color network: no acceptance in " + std::to_string(max_retries) +
                           " attempts",
                       0.0);
}

}  // namespace

WeightedColor sample_focal_network(const ModelParams& params, double zeta, RngStream& rng,
                                   std::uint64_t max_retries) {
  auto cdf = cumulative(nu_circ_pmf(params, 1e-15).probs);
  return pasted_color(params, zeta, cdf, rng, false, max_retries);
}

WeightedColor sample_spinal_network(const ModelParams& params, double zeta, RngStream& rng,
                                    std::uint64_t max_retries) {
  auto cdf = cumulative(nu_circ_pmf(params, 1e-15).probs);
  return pasted_color(params, zeta, cdf, rng, true, max_retries);
}

LocalBall sample_local_ball(const NetworkModel& model, int r, RngStream& rng) {
  if (r < 0) throw std::invalid_argument("sample_local_ball: r must be >= 0");
  const ModelParams& p = model.params;
  const double zeta = model.tilt.zeta;
  LocalBall ball;
  ball.r = r;
  WeightedColor focal = pasted_color(p, zeta, model.nu_cdf, rng, false, 10'000'000);
  ball.weight = focal.weight;
  ball.N = focal.K;
  ball.focal = *focal.network.focal_point();
  BallVertex root;
  root.outdegree = static_cast<int>(focal.network.mutation_points().size());
  root.decoration = std::move(focal.network);
  root.spine_index = 0;
  ball.vertices.push_back(std::move(root));

  // Off-spine GW(Mhat) subtree hanging from (parent, slot) at distance dist.
  auto grow = [&](std::size_t parent, std::size_t slot, int dist) {
    std::vector<std::tuple<std::size_t, std::size_t, int>> todo{{parent, slot, dist}};
    while (!todo.empty()) {
      auto [par, s, d] = todo.back();
      todo.pop_back();
      if (d > r) continue;
      int m = static_cast<int>(sample_from_cdf(model.offspring.cdf, rng));
      BallVertex v;
      v.decoration = decorate(model, m, rng);
      v.outdegree = m;
      v.distance = d;
      v.parent = par;
      v.parent_slot = s;
      std::size_t id = ball.vertices.size();
      ball.vertices.push_back(std::move(v));
      for (int j = m - 1; j >= 0; --j) todo.push_back({id, static_cast<std::size_t>(j), d + 1});
    }
  };
  for (int j = 0; j < ball.vertices[0].outdegree; ++j) grow(0, static_cast<std::size_t>(j), 1);
  std::size_t below = 0;
  for (int k = 1; k <= r; ++k) {
    int mstar = static_cast<int>(sample_from_cdf(model.size_biased_cdf, rng));
    std::size_t slot = rng.below(static_cast<std::uint64_t>(mstar));
    BallVertex v;
    v.decoration = decorate(model, mstar, rng);
    v.outdegree = mstar;
    v.distance = k;
    v.spine_index = k;
    std::size_t id = ball.vertices.size();
    ball.vertices.push_back(std::move(v));
    ball.vertices[below].parent = id;
    ball.vertices[below].parent_slot = slot;
    for (int j = 0; j < mstar; ++j)
      if (static_cast<std::size_t>(j) != slot) grow(id, static_cast<std::size_t>(j), k + 1);
    below = id;
  }
  return ball;
}

ProbNTable prob_N_table(const ModelParams& params, double zeta, ProbNForm form, double tol) {
  NuCircPmf nu = nu_circ_pmf(params, tol * 1e-3);
  ProbNTable out;
  out.probs.resize(nu.probs.size());
  CompensatedSum total;
  double last = 1.0;
  for (std::size_t i = 0; i < nu.probs.size(); ++i) {
    int k = static_cast<int>(i) + 1;
    double e = pgf_from_state(params, k, zeta).mid();
    double w = nu.probs[i] * e * e;
    if (form == ProbNForm::Reversed) w /= reversal_mark_factor(params, k, zeta);
    out.probs[i] = w;
    total.add(w);
    last = e * e;
  }
  out.normalizer = total.value();
  for (double& x : out.probs) x /= out.normalizer;
  // Beyond the table E_k[zeta^M]^2 grows at most geometrically while
  // nu_circ decays factorially.
  out.tail_bound = nu.tail_bound * std::max(1.0, last) * 2.0 / out.normalizer;
  return out;
}

double prob_N(const ModelParams& params, double zeta, int k, ProbNForm form) {
  if (k < 1) throw std::invalid_argument("prob_N: k must be >= 1");
  ProbNTable t = prob_N_table(params, zeta, form);
  return static_cast<std::size_t>(k) <= t.probs.size() ? t.probs[static_cast<std::size_t>(k) - 1]
                                                       : 0.0;
}

PointView view_from_point(const GluedNetwork& g, const PointRef& x) {
  const ColorNetwork& d = g.decorations()[x.vertex];
  double local = d.lineages()[x.lineage].birth_time + x.offset;
  PointView v;
  v.N = static_cast<int>(d.alive_at(local));
  if (v.N == 0) v.N = 1;  // x sits exactly at its lineage's end
  v.since = g.height(x) - g.color_root_time(x.vertex);
  v.outdegree = g.tree().outdegree(x.vertex);
  return v;
}

}  // namespace phylonet
