#pragma once

#include <algorithm>
#include <atomic>
#include <exception>
#include <thread>
#include <vector>

namespace taushape {

// Runs f(i) for i in [0, n) on up to n_threads workers. Work is partitioned
// statically by index, so any per-item randomness derived from the index is
// identical for every thread count. The first exception thrown by an item is
// rethrown on the caller's thread.
template <typename F>
void parallel_for(std::size_t n, int n_threads, F&& f) {
  if (n == 0) return;
  std::size_t workers = static_cast<std::size_t>(std::max(1, n_threads));
  workers = std::min(workers, n);
  if (workers == 1) {
    for (std::size_t i = 0; i < n; ++i) f(i);
    return;
  }
  std::exception_ptr first_error = nullptr;
  std::atomic<bool> failed{false};
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (std::size_t i = w; i < n; i += workers) {
          if (failed.load(std::memory_order_relaxed)) return;
          f(i);
        }
      } catch (...) {
        if (!failed.exchange(true)) first_error = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

}  // namespace taushape
