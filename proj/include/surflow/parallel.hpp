#pragma once

#include <algorithm>
#include <cstddef>
#include <thread>
#include <vector>

namespace surflow {

/// Worker count: SURFACE_FLOW_THREADS if set (>= 1), else hardware concurrency.
int thread_count();

/// Runs fn(begin, end) over contiguous chunks of [0, n). Chunk boundaries
/// depend on the thread count, so fn must write only to its own range.
template <class Fn>
void parallel_for(std::size_t n, Fn&& fn, std::size_t min_chunk = 4096) {
  const std::size_t workers =
      std::min<std::size_t>(static_cast<std::size_t>(thread_count()),
                            std::max<std::size_t>(1, n / std::max<std::size_t>(1, min_chunk)));
  if (workers <= 1) {
    fn(std::size_t{0}, n);
    return;
  }
  const std::size_t chunk = (n + workers - 1) / workers;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    const std::size_t b = w * chunk;
    const std::size_t e = std::min(n, b + chunk);
    if (b >= e) break;
    pool.emplace_back([&fn, b, e] { fn(b, e); });
  }
  for (auto& th : pool) th.join();
}

}  // namespace surflow
