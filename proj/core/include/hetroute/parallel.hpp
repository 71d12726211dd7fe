#ifndef HETROUTE_PARALLEL_HPP
#define HETROUTE_PARALLEL_HPP

#include <cstdlib>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace hetroute {

/// Worker count: explicit flag > HETROUTE_JOBS env > hardware concurrency.
inline int resolve_jobs(int flag = 0) {
  if (flag > 0) return flag;
  if (const char* env = std::getenv("HETROUTE_JOBS")) {
    int v = std::atoi(env);
    if (v > 0) return v;
  }
  unsigned hc = std::thread::hardware_concurrency();
  return hc > 0 ? static_cast<int>(hc) : 1;
}

/// Runs fn(i) for i in [0, n). Tasks are indexed, so results gathered into
/// pre-sized slots are deterministic regardless of scheduling.
inline void parallel_for(long n, int jobs, const std::function<void(long)>& fn) {
  if (n <= 0) return;
  jobs = resolve_jobs(jobs);
  if (jobs <= 1 || n == 1) {
    for (long i = 0; i < n; ++i) fn(i);
    return;
  }
  if (jobs > n) jobs = static_cast<int>(n);
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(jobs));
  std::exception_ptr first_error;
  std::mutex error_mutex;
  for (int t = 0; t < jobs; ++t) {
    pool.emplace_back([=, &fn, &first_error, &error_mutex] {
      try {
        for (long i = t; i < n; i += jobs) fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  if (first_error) std::rethrow_exception(first_error);
}

}  // namespace hetroute

#endif
