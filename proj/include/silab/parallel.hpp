#pragma once

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace silab {

/// Worker count from SILAB_WORKERS, else the hardware concurrency.
inline int default_workers() {
  if (const char* env = std::getenv("SILAB_WORKERS")) {
    try {
      const int n = std::stoi(env);
      if (n >= 1) return n;
    } catch (...) {
    }
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw ? static_cast<int>(hw) : 1;
}

/// Calls fn(i) for i in [0, n) on `workers` threads pulling from a shared
/// counter. Results go to out[i], so the order never depends on scheduling.
/// The first exception thrown by a task is rethrown after all threads join.
template <class R, class Fn>
std::vector<R> parallel_map(std::uint64_t n, int workers, Fn&& fn) {
  std::vector<R> out(n);
  std::atomic<std::uint64_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto work = [&] {
    for (;;) {
      const std::uint64_t i = next.fetch_add(1);
      if (i >= n) return;
      try {
        out[i] = fn(i);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
      }
    }
  };
  const int threads = static_cast<int>(std::min<std::uint64_t>(n, static_cast<std::uint64_t>(std::max(1, workers))));
  if (threads <= 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(work);
    for (auto& th : pool) th.join();
  }
  if (error) std::rethrow_exception(error);
  return out;
}

template <class Fn>
void parallel_for(std::uint64_t n, int workers, Fn&& fn) {
  parallel_map<char>(n, workers, [&](std::uint64_t i) {
    fn(i);
    return char{0};
  });
}

}  // namespace silab
