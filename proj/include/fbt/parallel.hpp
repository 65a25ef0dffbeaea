#pragma once

#include <algorithm>
#include <cstddef>
#include <thread>
#include <vector>

namespace fbt {

// Runs fn(begin, end) over contiguous chunks of [0, n). Chunks touch disjoint
// data; callers do their reductions afterwards in index order, so results do
// not depend on the worker count.
template <typename Fn>
void parallel_for(std::size_t n, unsigned workers, Fn&& fn, std::size_t min_chunk = 256) {
  const std::size_t max_workers = std::max<std::size_t>(1, n / std::max<std::size_t>(1, min_chunk));
  const std::size_t w = std::min<std::size_t>(std::max(1u, workers), max_workers);
  if (w <= 1) {
    fn(std::size_t{0}, n);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(w - 1);
  const std::size_t chunk = (n + w - 1) / w;
  for (std::size_t k = 1; k < w; ++k) {
    const std::size_t b = k * chunk, e = std::min(n, b + chunk);
    if (b < e) pool.emplace_back([&fn, b, e] { fn(b, e); });
  }
  fn(std::size_t{0}, std::min(n, chunk));
  for (auto& t : pool) t.join();
}

}  // namespace fbt
