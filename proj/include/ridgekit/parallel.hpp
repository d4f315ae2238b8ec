#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace ridgekit {

/// Worker count: RIDGEKIT_THREADS when set to a positive integer, otherwise
/// the hardware concurrency.
inline unsigned thread_budget() {
  if (const char* env = std::getenv("RIDGEKIT_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && v > 0) return static_cast<unsigned>(v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

/// Runs fn(i) for i in [0, n). Work is handed out dynamically; callers must
/// write results to per-index slots so the outcome does not depend on timing.
/// The first exception thrown by any task is rethrown.
template <class Fn>
void parallel_for(std::size_t n, Fn&& fn, unsigned threads = thread_budget()) {
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, n));
  if (threads <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  {
    std::vector<std::jthread> pool;
    pool.reserve(threads);
    for (unsigned t = 0; t < threads; ++t) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < n; i = next++) {
          try {
            fn(i);
          } catch (...) {
            std::lock_guard lock(error_mutex);
            if (!error) error = std::current_exception();
          }
        }
      });
    }
  }
  if (error) std::rethrow_exception(error);
}

}  // namespace ridgekit
