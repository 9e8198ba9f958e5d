#pragma once

// Deterministic chunked parallel-for.  Work items write into preassigned
// slots and reductions run sequentially afterwards, so results do not depend
// on the worker count.

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace sgcert {

inline int resolve_workers(int requested) {
  if (requested > 0) return requested;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

/// Calls body(begin, end) over disjoint chunks covering [0, n).
/// Chunks are claimed dynamically; the body must only write to state owned
/// by indices in its chunk.
inline void parallel_for(uint64_t n, int workers,
                         const std::function<void(uint64_t, uint64_t)>& body,
                         uint64_t grain = 1024) {
  workers = resolve_workers(workers);
  if (n == 0) return;
  if (workers <= 1 || n <= grain) {
    body(0, n);
    return;
  }
  std::atomic<uint64_t> next{0};
  std::exception_ptr first_error;
  std::mutex error_mutex;
  auto run = [&]() {
    for (;;) {
      const uint64_t begin = next.fetch_add(grain);
      if (begin >= n) return;
      const uint64_t end = std::min(begin + grain, n);
      try {
        body(begin, end);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(static_cast<size_t>(workers));
  for (int w = 0; w < workers; ++w) pool.emplace_back(run);
  for (auto& th : pool) th.join();
  if (first_error) std::rethrow_exception(first_error);
}

}  // namespace sgcert
