#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "phylonet/rng.hpp"

namespace phylonet {

/// Rates of the logistic branching process: per-lineage death rate alpha,
/// coalescence parameter beta, mutation rate mu; the birth rate is 1.
struct ModelParams {
  double alpha = 1.0;
  double beta = 1.0;
  double mu = 1.0;

  ModelParams() = default;
  /// Throws std::invalid_argument unless all rates are finite and positive.
  ModelParams(double a, double b, double m);

  /// Total down-rate per lineage in state k: alpha + mu + (k-1) beta.
  double rho(std::size_t k) const { return alpha + mu + static_cast<double>(k - 1) * beta; }
};

/// Checked version of ModelParams::rho; k = 0 throws.
double rho(const ModelParams& params, std::size_t k);

enum class EventKind : std::uint8_t { Birth, Death, Coalescence, Mutation };

inline bool is_down(EventKind k) { return k != EventKind::Birth; }
char event_code(EventKind kind);
EventKind event_from_code(char code);

struct Event {
  double time;
  EventKind kind;
};

/// Integer path with marked jumps. State starts at initial_state at
/// start_time, moves +1 on Birth and -1 otherwise, and reaches 0 exactly at
/// the last event. The default-constructed value is the empty path sitting
/// at 0 (no events, zero duration).
class MarkedTrajectory {
 public:
  MarkedTrajectory() = default;
  /// Validates the path invariants; throws std::invalid_argument.
  MarkedTrajectory(int initial_state, double start_time, std::vector<Event> events);

  int initial_state() const { return initial_state_; }
  double start_time() const { return start_time_; }
  double end_time() const { return events_.empty() ? start_time_ : events_.back().time; }
  const std::vector<Event>& events() const { return events_; }
  bool empty() const { return initial_state_ == 0; }

  /// M: number of Mutation marks.
  std::size_t mutation_count() const { return mutations_; }
  /// T: absorption time minus start time.
  double duration() const { return end_time() - start_time_; }
  /// L: integral of the state over the lifetime.
  double length() const { return length_; }

  /// State on [event_{i-1}, event_i); states()[0] is the initial state and
  /// states().back() is 0.
  std::vector<int> states() const;
  /// Right-continuous state at time t (0 outside the lifetime).
  int state_at(double t) const;
  std::vector<double> mutation_times() const;
  /// Integral of the state over [start_time, min(a, end_time)].
  double integral_until(double a) const;

 private:
  int initial_state_ = 0;
  double start_time_ = 0.0;
  std::vector<Event> events_;
  std::size_t mutations_ = 0;
  double length_ = 0.0;
};

inline constexpr std::uint64_t kDefaultEventCap = 10'000'000;

/// Draws the kind of a down-jump from state k: Mutation, Death or
/// Coalescence with probabilities mu/rho_k, alpha/rho_k, (k-1)beta/rho_k.
EventKind draw_down_kind(const ModelParams& params, int k, RngStream& rng);

/// Gillespie simulation from x0 >= 1 until absorption. Throws CapExceeded
/// once more than event_cap events would be needed.
MarkedTrajectory simulate_trajectory(const ModelParams& params, int x0, RngStream& rng,
                                     std::uint64_t event_cap = kDefaultEventCap,
                                     double start_time = 0.0);

/// Summary statistics of a path without storing it.
struct TrajectoryStats {
  std::size_t M = 0;
  double T = 0.0;
  double L = 0.0;
};
TrajectoryStats simulate_stats(const ModelParams& params, int x0, RngStream& rng,
                               std::uint64_t event_cap = kDefaultEventCap);

/// Resimulates from state 1 until the path has exactly m mutations.
/// Throws RetryExhausted (with the observed acceptance rate) after max_retries.
MarkedTrajectory condition_on_mutations(const ModelParams& params, std::size_t m, RngStream& rng,
                                        std::uint64_t max_retries = 10'000'000);

/// Back-to-back pasting f ≀ g on [-T_f, T_g): the left-limit time reversal of
/// f followed by g. Jumps of f change direction under reversal, so f's
/// down-jumps become Births while f's Births become down-jumps whose kinds are
/// drawn from the per-state law (draw_down_kind). If g starts one below f, the
/// jump at time 0 gets `junction`; if they start equal there is no jump at 0.
MarkedTrajectory paste_back_to_back(const MarkedTrajectory& f, const MarkedTrajectory& g,
                                    const ModelParams& params, RngStream& rng,
                                    EventKind junction = EventKind::Mutation);

/// K with P(K = n) proportional to prod_{k<=n} 1/rho_k.
int sample_nu_circ(const ModelParams& params, RngStream& rng);

/// The path seen from a uniformly chosen mutation of an M-biased path:
/// K ~ nu_circ, X' from K, X'' from K-1, pasted with a Mutation at time 0.
MarkedTrajectory sample_x_mut(const ModelParams& params, RngStream& rng);

/// Inverse-CDF draw from a table of cumulative probabilities. If u exceeds
/// the last entry, the last index is returned.
std::size_t sample_from_cdf(const std::vector<double>& cdf, RngStream& rng);
std::vector<double> cumulative(const std::vector<double>& probs);

}  // namespace phylonet
