#include <chrono>
#include <cmath>
#include <sstream>

#include "phylonet/cli.hpp"
#include "phylonet/errors.hpp"
#include "phylonet/verify.hpp"

namespace phylonet::verify {

bool SuiteReport::passed() const {
  for (const auto& c : checks)
    if (!c.passed) return false;
  return true;
}

json SuiteReport::to_json() const {
  json arr = json::array();
  for (const auto& c : checks) arr.push_back(verify::to_json(c));
  return json{{"suite", suite}, {"passed", passed()}, {"checks", arr}};
}

bool Criterion::passed() const {
  if (checks.empty()) return false;
  for (const auto& c : checks)
    if (!c.passed) return false;
  return true;
}

const std::vector<std::string>& suite_names() {
  static const std::vector<std::string> names{"model", "analytics", "network", "crt", "local"};
  return names;
}

namespace {

void append(std::vector<Check>& to, std::vector<Check> more) {
  for (auto& c : more) to.push_back(std::move(c));
}

std::vector<ModelParams> sign_grid() {
  return {ModelParams(1.0, 1.0, 1.0), ModelParams(0.2, 0.2, 0.2), ModelParams(0.5, 0.5, 0.1),
          ModelParams(0.3, 0.5, 1.0), ModelParams(0.1, 1.0, 0.5)};
}

Check gap_decreasing(const ModelParams& p, int max_depth) {
  json table;
  Check base = convergents(p, max_depth, &table);
  bool ok = true;
  double prev = std::numeric_limits<double>::infinity();
  for (const auto& row : table) {
    double g = row["sup_gap"].get<double>();
    if (g <= 1e-16) break;  // rounding floor
    if (!(g < prev)) ok = false;
    prev = g;
  }
  Check c;
  c.name = "sup_gap_strictly_decreasing";
  c.passed = ok;
  c.summary = ok ? "strictly decreasing until the rounding floor" : "not monotone";
  c.data = {{"table", table}};
  return c;
}

}  // namespace

SuiteReport run_suite(const std::string& suite, const SuiteConfig& cfg) {
  SuiteReport r;
  r.suite = suite;
  const ModelParams& p = cfg.params;
  const std::size_t S = cfg.samples;
  if (suite == "model") {
    r.checks.push_back(measure_change(p, 0.5, S, cfg.mc));
    r.checks.push_back(measure_change(p, 0.9, S, cfg.mc));
    append(r.checks, x_mut_view(p, S, cfg.mc));
    r.checks.push_back(expected_M_mc(p, S, cfg.mc));
  } else if (suite == "analytics") {
    json table;
    r.checks.push_back(convergents(p, 30, &table));
    r.checks.back().data["table"] = table;
    double em = expected_M(p).mid();
    std::optional<double> exact;
    if (em <= 1.0) exact = 1.0;
    r.checks.push_back(extinction(p, exact, true));
    r.checks.push_back(tilt_identity(p));
    auto grid = sign_grid();
    grid.push_back(p);
    r.checks.push_back(malthusian_sign(grid));
    r.checks.push_back(malthusian_identity(p, S, cfg.mc));
  } else if (suite == "network") {
    NetworkModel m = NetworkModel::make(p);
    r.checks.push_back(tree_methods(m, 6, std::min<std::size_t>(S, 100000), cfg.mc));
    r.checks.push_back(dwass_small(m, 8, S, cfg.mc));
    r.checks.push_back(dwass_asymptotic(m, {250, 500, 1000, 2000}, 0.10));
    append(r.checks, samplers_agree(m, 4, std::min<std::size_t>(S, 20000), cfg.mc));
    append(r.checks, network_metric(m, cfg.n, 20, 100, cfg.mc));
    r.checks.push_back(decoration_consistency(m, std::min<std::size_t>(S, 20000), cfg.mc));
  } else if (suite == "crt") {
    NetworkModel m = NetworkModel::make(p);
    CrtConstants c = crt_constants(p, S, cfg.mc);
    append(r.checks, crt_dual_estimators(c));
    CrtScalingReport rep = verify_crt_scaling(m, cfg.n, cfg.replicates, c.EUstar.value, cfg.mc);
    r.checks.push_back(length_per_color(rep, c));
  } else if (suite == "local") {
    NetworkModel m = NetworkModel::make(p);
    std::size_t networks = std::max<std::size_t>(1, cfg.replicates / 5);
    r.checks.push_back(prob_N_internal(m, S, cfg.mc));
    r.checks.push_back(prob_N_finite(m, cfg.n, networks, 5, cfg.mc));
    r.checks.push_back(time_since_mutation(m, cfg.n, networks, 5, 20000, cfg.mc));
    r.checks.push_back(focal_outdegree(m, S, cfg.n, networks, 5, cfg.mc));
    // No mu makes E[M] = 1 for some (alpha, beta), e.g. (1, 1) where E[M] < 1
    // for every mu; the check then runs at alpha = beta = 0.5.
    ModelParams crit;
    try {
      crit = ModelParams(p.alpha, p.beta, tune_mu_for_critical(p.alpha, p.beta));
    } catch (const NumericError&) {
      crit = ModelParams(0.5, 0.5, tune_mu_for_critical(0.5, 0.5));
    }
    r.checks.push_back(prob_N_critical(crit));
  } else {
    throw UsageError("unknown suite '" + suite + "' (expected model, analytics, network, crt, local)");
  }
  return r;
}

namespace {

const ModelParams kUnit(1.0, 1.0, 1.0);
const ModelParams kFifth(0.2, 0.2, 0.2);

Check timed(const std::string& name, double seconds, double budget) {
  Check c;
  c.name = name;
  c.passed = seconds < budget;
  c.summary = std::to_string(seconds) + " s (budget " + std::to_string(budget) + " s)";
  c.data = {{"seconds", seconds}, {"budget", budget}};
  return c;
}

void tag_all(std::vector<Check>& v, const std::string& suffix) {
  for (auto& c : v) c.name += suffix;
}

}  // namespace

Criterion run_criterion(int id, const McConfig& mc) {
  Criterion cr;
  cr.id = id;
  auto t0 = std::chrono::steady_clock::now();
  auto since = [&] {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  };
  auto& out = cr.checks;
  switch (id) {
    case 1:
      cr.title = "analytic exactness of E[M]";
      out.push_back(expected_M_exact(kUnit, std::exp(1.0) - 2.0, "unit"));
      out.push_back(expected_M_exact(kFifth, 0.04 * (std::exp(5.0) - 6.0), "fifth"));
      break;
    case 2: {
      cr.title = "certified convergents";
      out.push_back(convergents(kUnit, 30));
      out.back().name += "_unit";
      out.push_back(convergents(kFifth, 60));
      out.back().name += "_fifth";
      out.push_back(convergent_gap_at(kUnit, 20, 1e-15));
      out.push_back(gap_decreasing(kUnit, 30));
      out.push_back(timed("runtime", since(), 1.0));
      break;
    }
    case 3:
      cr.title = "extinction probability";
      out.push_back(extinction(kUnit, 1.0, false));
      out.back().name += "_unit";
      out.push_back(extinction(kFifth, std::nullopt, true));
      out.back().name += "_fifth";
      break;
    case 4:
      cr.title = "tilt and growth rate";
      out.push_back(tilt_identity(kUnit));
      out.back().name += "_unit";
      out.push_back(tilt_identity(kFifth));
      out.back().name += "_fifth";
      out.push_back(malthusian_sign(sign_grid()));
      out.push_back(malthusian_identity(kUnit, 100000, mc));
      out.back().name += "_unit";
      out.push_back(malthusian_identity(kFifth, 100000, mc));
      out.back().name += "_fifth";
      break;
    case 5:
      cr.title = "measure-change identity";
      out.push_back(measure_change(kUnit, 0.5, 100000, mc));
      out.push_back(measure_change(kUnit, 0.9, 100000, mc));
      break;
    case 6:
      cr.title = "path decomposition";
      append(out, x_mut_view(kUnit, 100000, mc));
      break;
    case 7: {
      cr.title = "Dwass formula and size asymptotics";
      NetworkModel m = NetworkModel::make(kUnit);
      out.push_back(dwass_small(m, 8, 200000, mc));
      out.back().name += "_unit";
      NetworkModel f = NetworkModel::make(kFifth);
      out.push_back(dwass_small(f, 8, 200000, mc));
      out.back().name += "_fifth";
      out.push_back(dwass_asymptotic(m, {250, 500, 1000, 2000}, 0.10));
      out.push_back(timed("runtime", since(), 60.0));
      break;
    }
    case 8: {
      cr.title = "network samplers";
      NetworkModel near = NetworkModel::make(ModelParams(0.5, 0.5, 0.36));
      append(out, samplers_agree(near, 4, 20000, mc));
      NetworkModel m = NetworkModel::make(kUnit);
      append(out, network_metric(m, 200, 20, 100, mc));
      out.push_back(tree_methods(m, 6, 100000, mc));
      break;
    }
    case 9: {
      cr.title = "CRT-scale checks";
      NetworkModel m = NetworkModel::make(kUnit);
      CrtConstants c = crt_constants(kUnit, 100000, mc);
      append(out, crt_dual_estimators(c));
      auto r500 = verify_crt_scaling(m, 500, 1000, c.EUstar.value, mc);
      out.push_back(length_per_color(r500, c));
      Estimate sup_e = excursion_sup_oracle(1000000, 400, mc);
      auto r2000 = verify_crt_scaling(m, 2000, 200, c.EUstar.value, mc);
      out.push_back(max_height(r2000, c, sup_e, 0.15));
      std::vector<CrtScalingReport> trend;
      for (std::size_t n : {200, 800, 3200})
        trend.push_back(verify_crt_scaling(m, n, 100, c.EUstar.value, mc, 256));
      out.push_back(deviation_trend(trend));
      break;
    }
    case 10: {
      cr.title = "local limit";
      for (const auto& [p, label] : {std::pair{kUnit, "_unit"}, std::pair{kFifth, "_fifth"}}) {
        NetworkModel m = NetworkModel::make(p);
        std::vector<Check> v;
        v.push_back(prob_N_internal(m, 100000, mc));
        v.push_back(prob_N_finite(m, 2000, 200, 5, mc));
        tag_all(v, label);
        append(out, std::move(v));
      }
      out.push_back(prob_N_critical(ModelParams(0.5, 0.5, tune_mu_for_critical(0.5, 0.5))));
      break;
    }
    case 11: {
      cr.title = "reproducibility";
      const std::vector<std::vector<std::string>> runs{
          {"analyze", "--alpha", "1", "--beta", "1", "--mu", "1", "--samples", "20000"},
          {"verify", "model", "--samples", "20000"},
          {"simulate", "--n", "50", "--seed", "7"},
          {"contour", "--n", "100", "--seed", "3"},
          {"local-ball", "--alpha", "0.2", "--beta", "0.2", "--mu", "0.2", "--seed", "5"}};
      for (const auto& args : runs) {
        std::vector<std::string> outputs;
        for (const char* w : {"1", "1", "2", "4"}) {
          auto a = args;
          a.push_back("--workers");
          a.push_back(w);
          std::ostringstream o, e;
          int code = cli::run(a, o, e);
          outputs.push_back(std::to_string(code) + "\n" + o.str());
        }
        bool same = true;
        for (const auto& s : outputs) same = same && s == outputs[0];
        Check c;
        c.name = "identical_output_" + args[0] + (args[0] == "verify" ? "_" + args[1] : "");
        c.passed = same && outputs[0].size() > 2;
        c.summary = same ? "byte-identical across repeats and worker counts 1, 2, 4"
                         : "outputs differ";
        c.data = {{"bytes", outputs[0].size()}};
        out.push_back(std::move(c));
      }
      break;
    }
    default:
      throw UsageError("criterion id must be in 1..11");
  }
  cr.seconds = since();
  return cr;
}

}  // namespace phylonet::verify
