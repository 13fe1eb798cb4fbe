#pragma once

#include <algorithm>
#include <cstddef>
#include <functional>
#include <thread>
#include <vector>

namespace kgl3 {

/// Process-wide worker count used by the parallel maps below. 0 means
/// "hardware concurrency".
inline unsigned& worker_threads() {
  static unsigned n = 1;
  return n;
}

inline unsigned effective_threads() {
  unsigned n = worker_threads();
  if (n == 0) n = std::max(1u, std::thread::hardware_concurrency());
  return n;
}

/// Evaluates fn(i) for i in [0, count) and returns the results in index
/// order. Work is split into contiguous blocks; the result never depends on
/// the thread count because every slot is written exactly once and any
/// reduction happens afterwards, sequentially, in the caller.
template <typename T, typename Fn>
std::vector<T> parallel_map(std::size_t count, Fn&& fn) {
  std::vector<T> out(count);
  unsigned threads = std::min<std::size_t>(effective_threads(), std::max<std::size_t>(count, 1));
  if (threads <= 1) {
    for (std::size_t i = 0; i < count; ++i) out[i] = fn(i);
    return out;
  }
  std::vector<std::jthread> pool;
  pool.reserve(threads);
  std::size_t block = (count + threads - 1) / threads;
  for (unsigned w = 0; w < threads; ++w) {
    std::size_t lo = w * block;
    std::size_t hi = std::min(count, lo + block);
    if (lo >= hi) break;
    pool.emplace_back([&, lo, hi] {
      for (std::size_t i = lo; i < hi; ++i) out[i] = fn(i);
    });
  }
  pool.clear();  // join before handing out the results
  return out;
}

/// Ordered left-to-right sum of parallel_map results.
template <typename T, typename Fn>
T parallel_sum(std::size_t count, Fn&& fn, T zero = T{}) {
  auto parts = parallel_map<T>(count, std::forward<Fn>(fn));
  T acc = zero;
  for (const auto& p : parts) acc += p;
  return acc;
}

}  // namespace kgl3
