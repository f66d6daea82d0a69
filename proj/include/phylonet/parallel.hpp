#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <optional>
#include <thread>
#include <vector>

namespace phylonet {

unsigned default_workers();

/// Evaluates fn(0..n-1) on up to `workers` threads and returns results in
/// index order. Callers reduce the vector serially, so the outcome does not
/// depend on the worker count. On failure the exception of the smallest
/// failing index is rethrown.
template <class F>
auto parallel_map(std::size_t n, unsigned workers, F&& fn)
    -> std::vector<decltype(fn(std::size_t{}))> {
  using T = decltype(fn(std::size_t{}));
  std::vector<std::optional<T>> slots(n);
  std::vector<std::exception_ptr> errors(n);
  std::atomic<std::size_t> next{0};
  auto body = [&] {
    for (;;) {
      std::size_t i = next.fetch_add(1);
      if (i >= n) return;
      try {
        slots[i].emplace(fn(i));
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  unsigned w = std::max(1u, std::min<unsigned>(workers == 0 ? default_workers() : workers,
                                               static_cast<unsigned>(std::max<std::size_t>(n, 1))));
  if (w == 1) {
    body();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(w);
    for (unsigned t = 0; t < w; ++t) pool.emplace_back(body);
    for (auto& th : pool) th.join();
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  std::vector<T> out;
  out.reserve(n);
  for (auto& s : slots) out.push_back(std::move(*s));
  return out;
}

}  // namespace phylonet
