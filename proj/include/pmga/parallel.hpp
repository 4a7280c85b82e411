#pragma once

// Minimal static-partition parallel loop. Callers write results into
// preallocated slots indexed by i, so the outcome never depends on the number
// of workers.

#include <algorithm>
#include <cstddef>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace pmga {

inline unsigned& thread_cap_ref() {
  static unsigned cap = 0;  // 0: use hardware concurrency
  return cap;
}

/// Caps the worker count used by parallel_for (0 restores the default).
inline void set_thread_cap(unsigned cap) { thread_cap_ref() = cap; }

inline unsigned worker_count() {
  unsigned cap = thread_cap_ref();
  if (cap == 0) {
    if (const char* env = std::getenv("PMGA_THREADS")) cap = static_cast<unsigned>(std::atoi(env));
  }
  const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  return cap == 0 ? hw : cap;
}

namespace detail {
inline thread_local bool in_worker = false;
}

/// Runs fn(i) for i in [0, n). Nested calls from inside a worker run serially.
template <class Fn>
void parallel_for(std::size_t n, Fn&& fn) {
  const std::size_t workers = detail::in_worker ? 1 : std::min<std::size_t>(worker_count(), n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      detail::in_worker = true;
      try {
        for (std::size_t i = w; i < n; i += workers) fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace pmga
