#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <thread>
#include <vector>

namespace sas {

// Runs fn(i) for i in [0, n). Results must be written to index-addressed
// slots by the caller, which makes the outcome independent of the thread
// count and of scheduling. fn must not throw.
template <typename Fn>
void parallel_for_index(std::size_t n, int threads, Fn&& fn) {
  if (n == 0) return;
  const int hw = static_cast<int>(std::thread::hardware_concurrency());
  int t = threads > 0 ? threads : std::max(1, hw);
  t = static_cast<int>(std::min<std::size_t>(static_cast<std::size_t>(t), n));
  if (t <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(t));
  for (int w = 0; w < t; ++w) {
    pool.emplace_back([&]() {
      for (;;) {
        const std::size_t i = next.fetch_add(1);
        if (i >= n) return;
        fn(i);
      }
    });
  }
  for (auto& th : pool) th.join();
}

}  // namespace sas
