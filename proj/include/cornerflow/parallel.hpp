#ifndef CORNERFLOW_PARALLEL_HPP_
#define CORNERFLOW_PARALLEL_HPP_

#include <cstdlib>
#include <exception>
#include <functional>
#include <thread>
#include <vector>

namespace cornerflow {

/// Worker cap: CORNERFLOW_THREADS, else hardware concurrency.
inline int thread_count() {
  if (const char* env = std::getenv("CORNERFLOW_THREADS")) {
    int v = std::atoi(env);
    if (v >= 1) return v;
  }
  unsigned hc = std::thread::hardware_concurrency();
  return hc == 0 ? 1 : static_cast<int>(hc);
}

/// Runs fn(i) for i in [0, count) on up to thread_count() workers. Results
/// must be written to index-addressed slots so the merge order is fixed;
/// the first exception is rethrown after all workers join.
inline void parallel_for(int count, const std::function<void(int)>& fn) {
  int workers = std::min(thread_count(), count);
  if (workers <= 1) {
    for (int i = 0; i < count; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(workers);
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&, w]() {
      try {
        for (int i = w; i < count; i += workers) fn(i);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace cornerflow

#endif  // CORNERFLOW_PARALLEL_HPP_
