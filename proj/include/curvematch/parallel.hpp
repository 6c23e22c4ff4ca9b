#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace curvematch {

/// Worker count for a requested job count; 0 means one per hardware thread.
inline std::size_t resolve_jobs(std::size_t jobs) {
  if (jobs == 0) jobs = std::thread::hardware_concurrency();
  return std::max<std::size_t>(jobs, 1);
}

/// Calls fn(i) for i in [0, n) on up to `jobs` threads. Each index is handled
/// exactly once; results must go to per-index slots so that any reduction
/// can be done afterwards in index order. The first exception is rethrown
/// after all workers have joined.
template <typename F>
void parallel_for(std::size_t n, std::size_t jobs, F&& fn) {
  jobs = std::min(resolve_jobs(jobs), n);
  if (jobs <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto worker = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(jobs);
  for (std::size_t k = 0; k < jobs; ++k) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace curvematch
