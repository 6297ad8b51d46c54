#pragma once

/**
 * Bounded fan-out with deterministic error propagation: workers pull
 * indices from a shared counter, per-index exceptions are captured, and
 * after the join the failure with the smallest index is rethrown. Output
 * slots are indexed, so results never depend on scheduling order.
 */

#include <atomic>
#include <cstddef>
#include <exception>
#include <functional>
#include <thread>
#include <vector>

namespace acps {

inline void parallel_for(std::size_t count, unsigned jobs,
                         const std::function<void(std::size_t)>& body) {
  if (count == 0) return;
  if (jobs <= 1 || count == 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }

  std::vector<std::exception_ptr> errors(count);
  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    while (true) {
      std::size_t i = next.fetch_add(1);
      if (i >= count) return;
      try {
        body(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };

  std::size_t n_threads = std::min<std::size_t>(jobs, count);
  std::vector<std::thread> threads;
  threads.reserve(n_threads);
  for (std::size_t t = 0; t < n_threads; ++t) threads.emplace_back(worker);
  for (auto& t : threads) t.join();

  for (auto& err : errors) {
    if (err) std::rethrow_exception(err);
  }
}

}  // namespace acps
