#pragma once

#include <cstddef>
#include <thread>
#include <vector>

namespace geoshoot {

/// Thread budget for per-point kernel loops. GEOSHOOT_THREADS caps it;
/// unset means one thread per hardware core. Always >= 1.
int default_thread_count();

/// Runs f(i) for i in [0, n) split into contiguous chunks, one per thread.
/// Each index is handled entirely by one thread, so per-index summation
/// order (and therefore the result) is independent of the thread count.
template <typename F>
void parallel_for(std::size_t n, int threads, F&& f) {
  if (threads <= 1 || n < 2) {
    for (std::size_t i = 0; i < n; ++i) f(i);
    return;
  }
  const std::size_t workers =
      std::min<std::size_t>(static_cast<std::size_t>(threads), n);
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    const std::size_t lo = n * w / workers;
    const std::size_t hi = n * (w + 1) / workers;
    pool.emplace_back([lo, hi, &f] {
      for (std::size_t i = lo; i < hi; ++i) f(i);
    });
  }
  for (std::thread& t : pool) t.join();
}

}  // namespace geoshoot
