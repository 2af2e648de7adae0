#pragma once

#include <cstddef>
#include <thread>
#include <vector>

namespace contactlab {

/// Fans index chunks out to a small worker pool. Bodies must be pure with
/// respect to shared state; results are reduced by the caller after the join.
template <typename Body>
void parallel_for(std::size_t n, int threads, const Body& body) {
  if (threads <= 1 || n < 64) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  const int nw = std::min<int>(threads, std::thread::hardware_concurrency());
  std::vector<std::thread> pool;
  pool.reserve(nw);
  for (int w = 0; w < nw; ++w)
    pool.emplace_back([&, w] {
      for (std::size_t i = w; i < n; i += nw) body(i);
    });
  for (auto& t : pool) t.join();
}

}  // namespace contactlab
