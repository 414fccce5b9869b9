#ifndef LPCOMPACT_REDUCE_HPP_
#define LPCOMPACT_REDUCE_HPP_

#include <algorithm>
#include <cstddef>
#include <span>
#include <thread>
#include <vector>

namespace lpcompact {

/// Pairwise (tree) summation with a fixed split rule, so the result depends
/// only on the input order and never on how work was scheduled.
inline double pairwise_sum(std::span<const double> v) {
  constexpr std::size_t kLeaf = 16;
  if (v.size() <= kLeaf) {
    double s = 0.0;
    for (double x : v) s += x;
    return s;
  }
  const std::size_t half = v.size() / 2;
  return pairwise_sum(v.first(half)) + pairwise_sum(v.subspan(half));
}

/// Strided variant: sums v[offset], v[offset + stride], ... (n terms).
inline double pairwise_sum_strided(std::span<const double> v, std::size_t offset,
                                   std::size_t stride, std::size_t n) {
  constexpr std::size_t kLeaf = 16;
  if (n <= kLeaf) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += v[offset + i * stride];
    return s;
  }
  const std::size_t half = n / 2;
  return pairwise_sum_strided(v, offset, stride, half) +
         pairwise_sum_strided(v, offset + half * stride, stride, n - half);
}

/// Runs body(i) for i in [0, n). Each index is handled by exactly one thread
/// and bodies must not share mutable state, so results are identical to the
/// sequential loop.
template <class Body>
void parallel_for(std::size_t n, Body&& body) {
  const std::size_t hw = std::max<std::size_t>(1, std::thread::hardware_concurrency());
  const std::size_t workers = std::min(hw, n / 64 + 1);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(workers);
  const std::size_t chunk = (n + workers - 1) / workers;
  for (std::size_t w = 0; w < workers; ++w) {
    const std::size_t lo = w * chunk;
    const std::size_t hi = std::min(n, lo + chunk);
    if (lo >= hi) break;
    pool.emplace_back([lo, hi, &body] {
      for (std::size_t i = lo; i < hi; ++i) body(i);
    });
  }
  for (auto& t : pool) t.join();
}

}  // namespace lpcompact

#endif  // LPCOMPACT_REDUCE_HPP_
