#pragma once

#include <atomic>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace ppc {

// Bounded worker pool over an index range. Work items are independent and
// write to caller-owned slots, so completion order never changes the result.
// The worker id is passed through so callers can bind per-worker resources
// (e.g. one external critic endpoint per worker).
inline void parallel_for(int n, int jobs, const std::function<void(int index, int worker)>& fn) {
  if (n <= 0) return;
  jobs = std::max(1, std::min(jobs, n));
  if (jobs == 1) {
    for (int i = 0; i < n; ++i) fn(i, 0);
    return;
  }
  std::atomic<int> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> workers;
  for (int w = 0; w < jobs; ++w) {
    workers.emplace_back([&, w] {
      while (!failed.load()) {
        const int i = next.fetch_add(1);
        if (i >= n) break;
        try {
          fn(i, w);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!error) error = std::current_exception();
          failed.store(true);
        }
      }
    });
  }
  for (auto& t : workers) t.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace ppc
