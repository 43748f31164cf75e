#pragma once

#include <exception>
#include <functional>
#include <thread>
#include <vector>

namespace lowrank {

/// Runs fn(i) for i in [0, count) on up to `jobs` threads.  Work items must
/// be independent; results are deterministic because each item owns its
/// index and (by convention) derives its own random stream from it.
inline void parallel_for(int count, int jobs,
                         const std::function<void(int)>& fn) {
  if (jobs < 1) jobs = 1;
  jobs = std::min<int>(jobs, count);
  if (jobs <= 1) {
    for (int i = 0; i < count; ++i) fn(i);
    return;
  }
  std::vector<std::thread> workers;
  std::vector<std::exception_ptr> errors(jobs);
  for (int t = 0; t < jobs; ++t) {
    workers.emplace_back([&, t]() {
      try {
        for (int i = t; i < count; i += jobs) fn(i);
      } catch (...) {
        errors[t] = std::current_exception();
      }
    });
  }
  for (auto& w : workers) w.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

/// Hardware thread count with a floor of 1.
inline int default_jobs() {
  unsigned n = std::thread::hardware_concurrency();
  return n == 0 ? 1 : static_cast<int>(n);
}

}  // namespace lowrank
