#include "phylonet/model.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "phylonet/analytics.hpp"
#include "phylonet/errors.hpp"
#include "phylonet/stats.hpp"

namespace phylonet {

ModelParams::ModelParams(double a, double b, double m) : alpha(a), beta(b), mu(m) {
  auto ok = [](double x) { return std::isfinite(x) && x > 0.0; };
  if (!ok(a) || !ok(b) || !ok(m))
    throw std::invalid_argument("ModelParams: alpha, beta, mu must be finite and > 0");
}

double rho(const ModelParams& params, std::size_t k) {
  if (k == 0) throw std::invalid_argument("rho: state must be >= 1");
  return params.rho(k);
}

char event_code(EventKind kind) {
  switch (kind) {
    case EventKind::Birth: return 'B';
    case EventKind::Death: return 'D';
    case EventKind::Coalescence: return 'C';
    case EventKind::Mutation: return 'M';
  }
  return '?';
}

EventKind event_from_code(char code) {
  switch (code) {
    case 'B': return EventKind::Birth;
    case 'D': return EventKind::Death;
    case 'C': return EventKind::Coalescence;
    case 'M': return EventKind::Mutation;
    default: throw std::invalid_argument(std::string("unknown event code '") + code + "'");
  }
}

MarkedTrajectory::MarkedTrajectory(int initial_state, double start_time, std::vector<Event> events)
    : initial_state_(initial_state), start_time_(start_time), events_(std::move(events)) {
  if (!std::isfinite(start_time)) throw std::invalid_argument("trajectory: start time not finite");
  if (initial_state < 0) throw std::invalid_argument("trajectory: negative initial state");
  if (initial_state == 0) {
    if (!events_.empty()) throw std::invalid_argument("trajectory: events after absorption");
    return;
  }
  if (events_.empty()) throw std::invalid_argument("trajectory: path never absorbed");
  int k = initial_state;
  double prev = start_time;
  CompensatedSum len;
  for (std::size_t i = 0; i < events_.size(); ++i) {
    const Event& e = events_[i];
    if (!std::isfinite(e.time) || e.time < prev || (i > 0 && e.time == prev))
      throw std::invalid_argument("trajectory: event times must be strictly increasing");
    if (k <= 0) throw std::invalid_argument("trajectory: event after absorption");
    len.add(static_cast<double>(k) * (e.time - prev));
    prev = e.time;
    k += e.kind == EventKind::Birth ? 1 : -1;
    if (e.kind == EventKind::Mutation) ++mutations_;
    if (k == 0 && i + 1 != events_.size())
      throw std::invalid_argument("trajectory: absorbed before the last event");
  }
  if (k != 0) throw std::invalid_argument("trajectory: last event does not reach 0");
  length_ = len.value();
}

std::vector<int> MarkedTrajectory::states() const {
  std::vector<int> s;
  s.reserve(events_.size() + 1);
  int k = initial_state_;
  s.push_back(k);
  for (const Event& e : events_) {
    k += e.kind == EventKind::Birth ? 1 : -1;
    s.push_back(k);
  }
  return s;
}

int MarkedTrajectory::state_at(double t) const {
  if (empty() || t < start_time_ || t >= end_time()) return 0;
  int k = initial_state_;
  for (const Event& e : events_) {
    if (e.time > t) break;
    k += e.kind == EventKind::Birth ? 1 : -1;
  }
  return k;
}

std::vector<double> MarkedTrajectory::mutation_times() const {
  std::vector<double> out;
  out.reserve(mutations_);
  for (const Event& e : events_)
    if (e.kind == EventKind::Mutation) out.push_back(e.time);
  return out;
}

double MarkedTrajectory::integral_until(double a) const {
  CompensatedSum acc;
  int k = initial_state_;
  double prev = start_time_;
  for (const Event& e : events_) {
    if (prev >= a) break;
    acc.add(static_cast<double>(k) * (std::min(e.time, a) - prev));
    prev = e.time;
    k += e.kind == EventKind::Birth ? 1 : -1;
  }
  return acc.value();
}

EventKind draw_down_kind(const ModelParams& params, int k, RngStream& rng) {
  double u = rng.uniform() * params.rho(static_cast<std::size_t>(k));
  if (u < params.mu) return EventKind::Mutation;
  if (u < params.mu + params.alpha || k == 1) return EventKind::Death;
  return EventKind::Coalescence;
}

namespace {

// One Gillespie step from state k >= 1: advances t and returns the kind.
inline EventKind step(const ModelParams& p, int k, double& t, RngStream& rng) {
  double r = p.rho(static_cast<std::size_t>(k));
  t += rng.exponential(static_cast<double>(k) * (1.0 + r));
  double u = rng.uniform() * (1.0 + r);
  if (u < 1.0) return EventKind::Birth;
  u -= 1.0;
  if (u < p.mu) return EventKind::Mutation;
  if (u < p.mu + p.alpha || k == 1) return EventKind::Death;
  return EventKind::Coalescence;
}

void check_start(int x0) {
  if (x0 < 1) throw std::invalid_argument("simulate: initial state must be >= 1");
}

[[noreturn]] void cap_exceeded(std::uint64_t cap) {
  throw CapExceeded("simulate: event cap of " + std::to_string(cap) + " exceeded");
}

}  // namespace

MarkedTrajectory simulate_trajectory(const ModelParams& params, int x0, RngStream& rng,
                                     std::uint64_t event_cap, double start_time) {
  check_start(x0);
  std::vector<Event> events;
  int k = x0;
  double t = start_time;
  while (k > 0) {
    if (events.size() >= event_cap) cap_exceeded(event_cap);
    EventKind kind = step(params, k, t, rng);
    events.push_back({t, kind});
    k += kind == EventKind::Birth ? 1 : -1;
  }
  return MarkedTrajectory(x0, start_time, std::move(events));
}

TrajectoryStats simulate_stats(const ModelParams& params, int x0, RngStream& rng,
                               std::uint64_t event_cap) {
  check_start(x0);
  TrajectoryStats s;
  CompensatedSum len;
  int k = x0;
  double t = 0.0;
  std::uint64_t n = 0;
  while (k > 0) {
    if (n++ >= event_cap) cap_exceeded(event_cap);
    double prev = t;
    EventKind kind = step(params, k, t, rng);
    len.add(static_cast<double>(k) * (t - prev));
    if (kind == EventKind::Mutation) ++s.M;
    k += kind == EventKind::Birth ? 1 : -1;
  }
  s.T = t;
  s.L = len.value();
  return s;
}

MarkedTrajectory condition_on_mutations(const ModelParams& params, std::size_t m, RngStream& rng,
                                        std::uint64_t max_retries) {
  std::vector<Event> events;
  for (std::uint64_t attempt = 0; attempt < max_retries; ++attempt) {
    events.clear();
    int k = 1;
    double t = 0.0;
    std::size_t muts = 0;
    bool rejected = false;
    while (k > 0) {
      if (events.size() >= kDefaultEventCap) cap_exceeded(kDefaultEventCap);
      EventKind kind = step(params, k, t, rng);
      events.push_back({t, kind});
      k += kind == EventKind::Birth ? 1 : -1;
      if (kind == EventKind::Mutation && ++muts > m) {
        rejected = true;  // the outcome is already decided
        break;
      }
    }
    if (!rejected && muts == m) return MarkedTrajectory(1, 0.0, std::move(events));
  }
  throw RetryExhausted("condition_on_mutations: no path with M=" + std::to_string(m) + " in " +
                           std::to_string(max_retries) + " attempts",
                       0.0);
}

MarkedTrajectory paste_back_to_back(const MarkedTrajectory& f, const MarkedTrajectory& g,
                                    const ModelParams& params, RngStream& rng, EventKind junction) {
  if (f.empty()) throw std::invalid_argument("paste: f must start from a positive state");
  const int K = f.initial_state();
  if (g.initial_state() != K && g.initial_state() != K - 1)
    throw std::invalid_argument("paste: g must start at f(0) or f(0)-1");
  if (g.initial_state() == K - 1 && !is_down(junction))
    throw std::invalid_argument("paste: junction must be a down-jump kind");

  const auto& fe = f.events();
  const std::size_t n = fe.size();
  auto fs = f.states();
  const double f0 = f.start_time();
  std::vector<Event> out;
  out.reserve(n + g.events().size());
  // Reversed f: on t < 0 the path equals f((-t)-), so event i of f at tau_i
  // becomes a jump from s_i to s_{i-1} at -tau_i (i = n-1..1); tau_n = T_f
  // becomes the start time with state s_{n-1}.
  for (std::size_t i = n - 1; i >= 1; --i) {
    double t = -(fe[i - 1].time - f0);
    int from = fs[i], to = fs[i - 1];
    EventKind kind = to > from ? EventKind::Birth : draw_down_kind(params, from, rng);
    out.push_back({t, kind});
  }
  if (g.initial_state() == K - 1) out.push_back({0.0, junction});
  const double g0 = g.start_time();
  for (const Event& e : g.events()) out.push_back({e.time - g0, e.kind});
  return MarkedTrajectory(fs[n - 1], -(fe[n - 1].time - f0), std::move(out));
}

std::vector<double> cumulative(const std::vector<double>& probs) {
  std::vector<double> cdf(probs.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    acc += probs[i];
    cdf[i] = acc;
  }
  return cdf;
}

std::size_t sample_from_cdf(const std::vector<double>& cdf, RngStream& rng) {
  double u = rng.uniform() * cdf.back();
  auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
  if (it == cdf.end()) return cdf.size() - 1;
  return static_cast<std::size_t>(it - cdf.begin());
}

int sample_nu_circ(const ModelParams& params, RngStream& rng) {
  auto table = nu_circ_pmf(params, 1e-15);
  return static_cast<int>(sample_from_cdf(cumulative(table.probs), rng)) + 1;
}

MarkedTrajectory sample_x_mut(const ModelParams& params, RngStream& rng) {
  int K = sample_nu_circ(params, rng);
  MarkedTrajectory past = simulate_trajectory(params, K, rng);
  MarkedTrajectory future = K > 1 ? simulate_trajectory(params, K - 1, rng) : MarkedTrajectory();
  return paste_back_to_back(past, future, params, rng, EventKind::Mutation);
}

}  // namespace phylonet
