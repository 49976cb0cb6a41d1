#pragma once

#include <cstdint>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

// Deterministic fan-out: work item i always computes the same result no matter
// how many workers run, so batch boundaries never leak into outputs. Worker
// count is capped by the TRIQNET_THREADS environment variable.
namespace triqnet::parallel {

inline int worker_cap() {
  if (const char* env = std::getenv("TRIQNET_THREADS")) {
    const int v = std::atoi(env);
    if (v > 0) return v;
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? static_cast<int>(hw) : 1;
}

template <typename Fn>
void parallel_for(std::uint64_t n, int max_workers, Fn&& fn) {
  if (n == 0) return;
  int workers = max_workers > 0 ? max_workers : worker_cap();
  if (static_cast<std::uint64_t>(workers) > n) workers = static_cast<int>(n);
  if (workers <= 1) {
    for (std::uint64_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  std::exception_ptr first_error;
  std::mutex error_mutex;
  for (int w = 0; w < workers; ++w) {
    const std::uint64_t begin = n * w / workers;
    const std::uint64_t end = n * (w + 1) / workers;
    pool.emplace_back([&, begin, end] {
      try {
        for (std::uint64_t i = begin; i < end; ++i) fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

}  // namespace triqnet::parallel
