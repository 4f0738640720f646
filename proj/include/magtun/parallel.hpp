#pragma once

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace magtun {

// Runs body(i) for i in [0, n) on up to `threads` workers. Callers write into
// per-index slots and reduce afterwards, so results do not depend on scheduling.
template <class Body>
void parallel_for(int n, int threads, Body&& body) {
  if (threads <= 1 || n <= 1) {
    for (int i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr err;
  std::mutex err_m;
  std::vector<std::thread> pool;
  int t = std::min(threads, n);
  pool.reserve(t);
  for (int w = 0; w < t; ++w)
    pool.emplace_back([&] {
      for (int i = next++; i < n; i = next++) {
        try {
          body(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(err_m);
          if (!err) err = std::current_exception();
        }
      }
    });
  for (auto& th : pool) th.join();
  if (err) std::rethrow_exception(err);
}

}  // namespace magtun
