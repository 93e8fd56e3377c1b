#pragma once

#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace spinsim::detail {

// Global cap on worker threads; 0 means hardware concurrency.
inline int& thread_cap() {
  static int cap = 0;
  return cap;
}

inline void set_thread_cap(int n) { thread_cap() = n < 0 ? 0 : n; }

// Run f(i) for i in [0, n) across up to thread_cap() threads with a static
// block partition. Each index runs exactly once; callers must write results
// into per-index slots so the outcome is independent of scheduling.
template <class F>
void parallel_for(int n, F&& f) {
  if (n <= 0) return;
  int cap = thread_cap();
  if (cap == 0) cap = static_cast<int>(std::thread::hardware_concurrency());
  if (cap < 1) cap = 1;
  const int workers = std::min(n, cap);

  if (workers == 1) {
    for (int i = 0; i < n; ++i) f(i);
    return;
  }

  std::exception_ptr first_error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  pool.reserve(static_cast<size_t>(workers));
  for (int w = 0; w < workers; ++w) {
    const int begin = static_cast<int>(static_cast<long long>(n) * w / workers);
    const int end = static_cast<int>(static_cast<long long>(n) * (w + 1) / workers);
    pool.emplace_back([&, begin, end] {
      try {
        for (int i = begin; i < end; ++i) f(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

}  // namespace spinsim::detail
