#pragma once

#include <cstdint>
#include <limits>

namespace phylonet {

/// Counter-based generator: draw i of stream (seed, id) is a keyed hash of i,
/// so streams never share state and need no coordination between threads.
class RngStream {
 public:
  using result_type = std::uint64_t;

  RngStream(std::uint64_t seed, std::uint64_t stream_id);

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream_id() const { return stream_id_; }
  std::uint64_t position() const { return counter_; }

  std::uint64_t next_u64();
  result_type operator()() { return next_u64(); }
  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform();
  /// Uniform on (0, 1].
  double uniform_pos();
  double exponential(double rate);
  bool bernoulli(double p);
  /// Uniform integer in [0, n), n > 0.
  std::uint64_t below(std::uint64_t n);

  /// Independent child stream derived from this stream's identity.
  RngStream split(std::uint64_t child) const;

 private:
  std::uint64_t seed_;
  std::uint64_t stream_id_;
  std::uint64_t key_;
  std::uint64_t gamma_;
  std::uint64_t counter_ = 0;
};

std::uint64_t mix64(std::uint64_t x);

/// Stream ids for one Monte Carlo job: tag in the high bits, chunk index below.
inline std::uint64_t stream_id(std::uint64_t tag, std::uint64_t index) {
  return (tag << 40) ^ index;
}

}  // namespace phylonet
