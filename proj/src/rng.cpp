#include "phylonet/rng.hpp"

#include <bit>
#include <cmath>

#include "phylonet/parallel.hpp"

namespace phylonet {

std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

RngStream::RngStream(std::uint64_t seed, std::uint64_t stream_id)
    : seed_(seed), stream_id_(stream_id) {
  key_ = mix64(seed ^ mix64(stream_id + 0x9e3779b97f4a7c15ULL));
  // Odd increment with enough bit transitions, as in SplitMix's split().
  std::uint64_t g = mix64(key_ ^ 0xd1b54a32d192ed03ULL) | 1ULL;
  if (std::popcount(g ^ (g >> 1)) < 24) g ^= 0xaaaaaaaaaaaaaaaaULL;
  gamma_ = g;
}

std::uint64_t RngStream::next_u64() {
  ++counter_;
  return mix64(key_ + counter_ * gamma_);
}

double RngStream::uniform() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double RngStream::uniform_pos() {
  return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
}

double RngStream::exponential(double rate) {
  return -std::log(uniform_pos()) / rate;
}

bool RngStream::bernoulli(double p) { return uniform() < p; }

__extension__ typedef unsigned __int128 u128;

std::uint64_t RngStream::below(std::uint64_t n) {
  // Lemire's nearly divisionless bounded integer.
  u128 m = static_cast<u128>(next_u64()) * n;
  auto low = static_cast<std::uint64_t>(m);
  if (low < n) {
    std::uint64_t threshold = (0 - n) % n;
    while (low < threshold) {
      m = static_cast<u128>(next_u64()) * n;
      low = static_cast<std::uint64_t>(m);
    }
  }
  return static_cast<std::uint64_t>(m >> 64);
}

RngStream RngStream::split(std::uint64_t child) const {
  return RngStream(seed_, mix64(stream_id_ * 0x9e3779b97f4a7c15ULL + child + 1));
}

unsigned default_workers() {
  unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : hw;
}

}  // namespace phylonet
