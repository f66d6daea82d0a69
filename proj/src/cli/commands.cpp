#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "phylonet/analytics.hpp"
#include "phylonet/cli.hpp"
#include "phylonet/errors.hpp"
#include "phylonet/io.hpp"
#include "phylonet/limits.hpp"
#include "phylonet/network.hpp"
#include "phylonet/verify.hpp"

namespace phylonet::cli {

namespace {

using nlohmann::json;

// Stream tags of the sampling commands.
constexpr std::uint64_t kTagSimulate = 0x201;
constexpr std::uint64_t kTagContour = 0x202;
constexpr std::uint64_t kTagLocalBall = 0x203;

json certified(const CertifiedValue& v, const std::string& method) {
  json j = io::to_json(v);
  j["value"] = v.mid();
  j["error"] = 0.5 * v.width();
  j["method"] = method;
  return j;
}

json estimate(const Estimate& e, const std::string& method) {
  json j = io::to_json(e);
  j["error"] = e.std_error;
  j["method"] = method;
  return j;
}

struct Extra {
  std::vector<int> depths{1, 2, 3, 4, 5, 10, 15, 20, 25, 30};
  int grid_points = 11;
  bool trajectory = false;
  int x0 = 1;
  std::size_t grid_size = 4096;
  int r = 2;
  std::uint64_t max_retries = 10'000'000;
  std::size_t replicates = 1000;
  std::string suite;
};

class Runner {
 public:
  Runner(const RunConfig& cfg, const Extra& x, std::string command)
      : cfg_(cfg), x_(x), command_(std::move(command)) {}

  McConfig mc() const { return {cfg_.seed, cfg_.workers}; }

  json header(json extra = json::object()) const {
    json c{{"alpha", cfg_.params.alpha}, {"beta", cfg_.params.beta}, {"mu", cfg_.params.mu},
           {"seed", cfg_.seed},          {"samples", cfg_.samples},   {"n", cfg_.n},
           {"tol", cfg_.tol},            {"format", cfg_.format},     {"method", cfg_.method}};
    for (auto& [k, v] : extra.items()) c[k] = v;
    return json{{"tool", kToolName}, {"version", kToolVersion}, {"command", command_}, {"config", c}};
  }

  json document(json body, json extra = json::object()) const {
    json j{{"schema_version", io::kSchemaVersion}, {"header", header(std::move(extra))}};
    for (auto& [k, v] : body.items()) j[k] = v;
    return j;
  }

  void require_format(std::initializer_list<const char*> allowed) const {
    for (const char* f : allowed)
      if (cfg_.format == f) return;
    throw UsageError("format '" + cfg_.format + "' is not available for " + command_);
  }

  std::string analyze() const {
    require_format({"json", "csv"});
    const ModelParams& p = cfg_.params;
    CertifiedValue em = expected_M(p, cfg_.tol);
    CertifiedValue pext = extinction_probability(p, cfg_.tol);
    auto [lo, hi] = simple_pext_bounds(p);
    TiltSolution tilt = zeta_tilt(p);
    GSeries gs = g_series(p, tilt.zeta);
    double lambda = malthusian(p);
    CertifiedValue psi = malthusian_psi(p, lambda, cfg_.tol);
    NuCircPmf nu = nu_circ_pmf(p, cfg_.tol);
    CrtConstants crt = crt_constants(p, cfg_.samples, mc());

    std::vector<double> nu_head(nu.probs.begin(),
                                nu.probs.begin() + std::min<std::size_t>(10, nu.probs.size()));
    json body{
        {"expected_M", certified(em, "series with geometric tail majorant")},
        {"extinction_probability", certified(pext, "fixed point of certified g")},
        {"extinction_simple_bounds", {{"lower", lo}, {"upper", hi}, {"method", "closed form"}}},
        {"zeta", {{"value", tilt.zeta}, {"error", kRootTol}, {"depth", gs.depth},
                  {"method", "root of s g'(s)/g(s) = 1"}}},
        {"E_zetaM", {{"value", tilt.E_zetaM}, {"error", gs.error}, {"depth", gs.depth},
                     {"method", "continued fraction at zeta"}}},
        {"sigma_hat_sq", {{"value", tilt.sigma_hat_sq}, {"error", gs.error}, {"depth", gs.depth},
                          {"method", "continued fraction derivatives at zeta"}}},
        {"lambda", {{"value", lambda}, {"error", kRootTol}, {"depth", psi.depth},
                    {"psi_at_lambda", certified(psi, "Laplace continued fractions")},
                    {"method", "root of Psi(lambda) = 1"}}},
        {"nu_circ_head", {{"probs", nu_head}, {"tail_bound", nu.tail_bound},
                          {"depth", nu.probs.size()}, {"error", nu.tail_bound},
                          {"method", "normalized products of 1/rho_k"}}},
        {"crt",
         {{"EUstar", estimate(crt.EUstar, "weighted mutation times")},
          {"EUstar_decomposition", estimate(crt.EUstar_decomposition, "nu_circ decomposition")},
          {"ell", estimate(crt.ell, "weighted length")},
          {"ell_measure_change", estimate(crt.ell_measure_change, "mutation rate change")},
          {"C", estimate(crt.C, "sigma_hat / (2 EUstar)")}}}};
    if (cfg_.format == "json") return document(body).dump(2) + "\n";

    std::ostringstream s;
    s << "quantity,value,error,method,n_samples_or_depth\n";
    auto row = [&](const std::string& q, const json& j) {
      std::string size = j.contains("n_samples") ? j["n_samples"].dump()
                         : j.contains("depth")   ? j["depth"].dump()
                                                 : "";
      s << q << ',' << j["value"].dump() << ',' << j["error"].dump() << ",\"" << j["method"].get<std::string>()
        << "\"," << size << '\n';
    };
    for (const char* q : {"expected_M", "extinction_probability", "zeta", "E_zetaM", "sigma_hat_sq", "lambda"})
      row(q, body[q]);
    for (auto& [k, v] : body["crt"].items()) row(k, v);
    return s.str();
  }

  std::string gfun_table() const {
    require_format({"json", "csv"});
    if (x_.grid_points < 2) throw UsageError("--grid-points must be at least 2");
    std::vector<double> z(x_.grid_points);
    for (int i = 0; i < x_.grid_points; ++i) z[i] = static_cast<double>(i) / (x_.grid_points - 1);
    json rows = json::array();
    std::ostringstream s;
    s << "depth,z,lower,upper,sup_gap,bound\n";
    for (int d : x_.depths) {
      if (d < 1) throw UsageError("depths must be positive");
      auto c = g_convergents_grid(cfg_.params, z, d);
      double gap = 0.0;
      std::vector<double> lower, upper;
      for (const auto& v : c) {
        lower.push_back(v.lower);
        upper.push_back(v.upper);
        gap = std::max(gap, v.upper - v.lower);
      }
      double bound = convergent_gap_bound(cfg_.params, d);
      rows.push_back({{"depth", d}, {"lower", lower}, {"upper", upper}, {"sup_gap", gap},
                      {"bound", bound}, {"method", "continued fraction convergents"}, {"error", gap}});
      for (std::size_t i = 0; i < z.size(); ++i)
        s << d << ',' << json(z[i]).dump() << ',' << json(lower[i]).dump() << ','
          << json(upper[i]).dump() << ',' << json(gap).dump() << ',' << json(bound).dump() << '\n';
    }
    if (cfg_.format == "csv") return s.str();
    return document({{"z", z}, {"depths", rows}},
                    {{"depths", x_.depths}, {"grid_points", x_.grid_points}})
               .dump(2) +
           "\n";
  }

  GluedNetwork network(RngStream& rng) const {
    NetworkModel model = NetworkModel::make(cfg_.params);
    NetworkMethod m = cfg_.method == "direct" ? NetworkMethod::Direct : NetworkMethod::Tilted;
    return sample_network(model, cfg_.n, rng, m, x_.max_retries);
  }

  std::string simulate() const {
    RngStream rng(cfg_.seed, stream_id(kTagSimulate, 0));
    if (x_.trajectory) {
      require_format({"json", "csv"});
      if (x_.x0 < 1) throw UsageError("--x0 must be at least 1");
      MarkedTrajectory path = simulate_trajectory(cfg_.params, x_.x0, rng);
      if (cfg_.format == "json")
        return document({{"trajectory", io::to_json(path)}}, {{"trajectory", true}, {"x0", x_.x0}})
                   .dump(2) +
               "\n";
      std::ostringstream s;
      s << "time,kind,state\n";
      auto states = path.states();
      s << json(path.start_time()).dump() << ",," << states[0] << '\n';
      for (std::size_t i = 0; i < path.events().size(); ++i)
        s << json(path.events()[i].time).dump() << ',' << event_code(path.events()[i].kind) << ','
          << states[i + 1] << '\n';
      return s.str();
    }
    GluedNetwork g = network(rng);
    if (cfg_.format == "csv") return io::edge_csv(g);
    if (cfg_.format == "newick") return io::extended_newick(g) + "\n";
    return document({{"network", io::to_json(g)}}).dump(2) + "\n";
  }

  std::string contour_cmd() const {
    require_format({"json", "csv"});
    if (x_.grid_size < 2) throw UsageError("--grid-size must be at least 2");
    RngStream rng(cfg_.seed, stream_id(kTagContour, 0));
    GluedNetwork g = network(rng);
    HeightProcess h = contour(g, rng, x_.grid_size);
    if (cfg_.format == "csv") return io::height_csv(h);
    return document({{"t", h.t}, {"h", h.h}, {"total_length", g.total_length()}},
                    {{"grid_size", x_.grid_size}})
               .dump(2) +
           "\n";
  }

  std::string local_ball() const {
    require_format({"json", "csv"});
    if (x_.r < 0) throw UsageError("--r must be nonnegative");
    NetworkModel model = NetworkModel::make(cfg_.params);
    RngStream rng(cfg_.seed, stream_id(kTagLocalBall, 0));
    LocalBall b = sample_local_ball(model, x_.r, rng);
    if (cfg_.format == "json")
      return document({{"ball", io::to_json(b)}}, {{"r", x_.r}}).dump(2) + "\n";
    std::ostringstream s;
    s << "vertex,parent,parent_slot,distance,spine_index,outdegree,lineages,length\n";
    for (std::size_t i = 0; i < b.vertices.size(); ++i) {
      const auto& v = b.vertices[i];
      s << i << ',' << (v.parent ? std::to_string(*v.parent) : "") << ',' << v.parent_slot << ','
        << v.distance << ',' << v.spine_index << ',' << v.outdegree << ','
        << v.decoration.lineages().size() << ',' << json(v.decoration.length()).dump() << '\n';
    }
    return s.str();
  }

  std::pair<int, std::string> verify() const {
    require_format({"json"});
    verify::SuiteConfig sc;
    sc.params = cfg_.params;
    sc.mc = mc();
    sc.samples = cfg_.samples;
    sc.n = cfg_.n;
    sc.replicates = x_.replicates;
    verify::SuiteReport r = verify::run_suite(x_.suite, sc);
    std::string text =
        document(r.to_json(), {{"suite", x_.suite}, {"replicates", x_.replicates}}).dump(2) + "\n";
    return {r.passed() ? kOk : kCheckFailed, text};
  }

 private:
  RunConfig cfg_;
  Extra x_;
  std::string command_;
};

std::filesystem::path resolve_output(const std::string& out) {
  std::filesystem::path p(out);
  if (p.is_relative())
    if (const char* dir = std::getenv("PHYLONET_OUT_DIR"); dir && *dir)
      p = std::filesystem::path(dir) / p;
  return p;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Random phylogenetic networks from a logistic branching process", kToolName};
  app.require_subcommand(1);
  app.set_config("--config", "", "plain key=value configuration file; flags override it");

  RunConfig cfg;
  Extra x;
  double alpha = cfg.params.alpha, beta = cfg.params.beta, mu = cfg.params.mu;
  app.add_option("--alpha", alpha, "death rate")->check(CLI::PositiveNumber);
  app.add_option("--beta", beta, "coalescence rate")->check(CLI::PositiveNumber);
  app.add_option("--mu", mu, "mutation rate")->check(CLI::PositiveNumber);
  app.add_option("--n", cfg.n, "number of colors")->check(CLI::PositiveNumber);
  app.add_option("--seed", cfg.seed, "master seed");
  app.add_option("--samples", cfg.samples, "Monte Carlo sample size")->check(CLI::PositiveNumber);
  app.add_option("--tol", cfg.tol, "series tolerance")->check(CLI::PositiveNumber);
  app.add_option("--format", cfg.format, "output format")
      ->check(CLI::IsMember({"json", "csv", "newick"}));
  app.add_option("--out", cfg.out, "output file (relative paths go under PHYLONET_OUT_DIR)");
  app.add_option("--workers", cfg.workers, "worker threads, 0 for all cores");
  app.add_option("--method", cfg.method, "network sampler")->check(CLI::IsMember({"tilted", "direct"}));

  auto* analyze = app.add_subcommand("analyze", "analytic summary and scaling constants");
  auto* gfun = app.add_subcommand("gfun-table", "convergent tables of the mutation-count pgf");
  gfun->add_option("--depths", x.depths, "convergent depths");
  gfun->add_option("--grid-points", x.grid_points, "points of the uniform grid on [0,1]");
  auto* simulate = app.add_subcommand("simulate", "sample a conditioned network");
  simulate->add_flag("--trajectory", x.trajectory, "emit a single marked path instead");
  simulate->add_option("--x0", x.x0, "initial state of the path");
  simulate->add_option("--max-retries", x.max_retries, "attempts before a sampler gives up");
  auto* contour_cmd = app.add_subcommand("contour", "height process along a randomized contour");
  contour_cmd->add_option("--grid-size", x.grid_size, "grid points on [0,1]");
  contour_cmd->add_option("--max-retries", x.max_retries, "attempts before a sampler gives up");
  auto* ball = app.add_subcommand("local-ball", "neighbourhood of a uniform point in the local limit");
  ball->add_option("--r", x.r, "color tree radius");
  auto* verify = app.add_subcommand("verify", "run a verification suite");
  verify->add_option("suite", x.suite, "model, analytics, network, crt or local")->required();
  verify->add_option("--replicates", x.replicates, "network replicates");
  for (auto* s : app.get_subcommands({})) s->fallthrough();

  std::vector<std::string> argv_s{kToolName};
  argv_s.insert(argv_s.end(), args.begin(), args.end());
  std::vector<const char*> argv;
  for (const auto& a : argv_s) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e, out, err);
    return code == static_cast<int>(CLI::ExitCodes::Success) ? kOk : kUsage;
  }

  int code = kOk;
  std::string text;
  try {
    cfg.params = ModelParams(alpha, beta, mu);
    Runner r(cfg, x, app.get_subcommands().front()->get_name());
    if (*analyze)
      text = r.analyze();
    else if (*gfun)
      text = r.gfun_table();
    else if (*simulate)
      text = r.simulate();
    else if (*contour_cmd)
      text = r.contour_cmd();
    else if (*ball)
      text = r.local_ball();
    else
      std::tie(code, text) = r.verify();
  } catch (const NumericError& e) {
    err << kToolName << ": numeric failure: " << e.what() << '\n';
    return kNumeric;
  } catch (const std::invalid_argument& e) {
    err << kToolName << ": usage: " << e.what() << '\n';
    return kUsage;
  } catch (const std::exception& e) {
    err << kToolName << ": error: " << e.what() << '\n';
    return kNumeric;
  }

  if (cfg.out.empty()) {
    out << text;
  } else {
    auto path = resolve_output(cfg.out);
    std::ofstream f(path, std::ios::binary);
    if (!(f << text)) {
      err << kToolName << ": cannot write " << path.string() << '\n';
      return kUsage;
    }
    err << kToolName << ": wrote " << path.string() << '\n';
  }
  if (code == kCheckFailed) err << kToolName << ": checks failed\n";
  return code;
}

}  // namespace phylonet::cli
