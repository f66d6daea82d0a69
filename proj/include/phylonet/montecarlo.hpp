#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "phylonet/parallel.hpp"
#include "phylonet/rng.hpp"

namespace phylonet {

/// Seed and worker cap for a Monte Carlo job.
struct McConfig {
  std::uint64_t seed = 42;
  unsigned workers = 0;  // 0 = hardware concurrency
};

inline constexpr std::size_t kChunkSize = 1024;

/// Splits n samples into fixed chunks of kChunkSize, runs
/// fn(rng, first, count) -> Acc on each chunk with its own stream
/// (seed, stream_id(tag, chunk)), and merges the partials in chunk order.
/// The result depends on neither the worker count nor scheduling.
template <class Acc, class F>
Acc mc_reduce(std::size_t n, const McConfig& cfg, std::uint64_t tag, F&& fn) {
  std::size_t chunks = (n + kChunkSize - 1) / kChunkSize;
  auto parts = parallel_map(chunks, cfg.workers, [&](std::size_t c) {
    RngStream rng(cfg.seed, stream_id(tag, c));
    std::size_t first = c * kChunkSize;
    std::size_t count = std::min(kChunkSize, n - first);
    return fn(rng, first, count);
  });
  Acc out{};
  for (auto& p : parts) out.merge(p);
  return out;
}

/// Same with per-sample results concatenated in sample order.
template <class T, class F>
std::vector<T> mc_collect(std::size_t n, const McConfig& cfg, std::uint64_t tag, F&& fn) {
  std::size_t chunks = (n + kChunkSize - 1) / kChunkSize;
  auto parts = parallel_map(chunks, cfg.workers, [&](std::size_t c) {
    RngStream rng(cfg.seed, stream_id(tag, c));
    std::size_t first = c * kChunkSize;
    std::size_t count = std::min(kChunkSize, n - first);
    std::vector<T> v;
    v.reserve(count);
    for (std::size_t i = 0; i < count; ++i) v.push_back(fn(rng, first + i));
    return v;
  });
  std::vector<T> out;
  out.reserve(n);
  for (auto& p : parts)
    for (auto& x : p) out.push_back(std::move(x));
  return out;
}

/// One stream per item, for jobs whose items are expensive (networks).
template <class T, class F>
std::vector<T> mc_items(std::size_t n, const McConfig& cfg, std::uint64_t tag, F&& fn) {
  return parallel_map(n, cfg.workers, [&](std::size_t i) {
    RngStream rng(cfg.seed, stream_id(tag, i));
    return fn(rng, i);
  });
}

}  // namespace phylonet
