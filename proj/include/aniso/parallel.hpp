#pragma once

// Data-parallel loops and deterministic reductions.
//
// parallel_for splits an index range into contiguous blocks, one per worker;
// callers write results to disjoint slots. pairwise_sum reduces in a fixed
// binary tree over the slot order, so the result does not depend on the
// number of workers.

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <span>
#include <thread>
#include <vector>

namespace aniso {

namespace detail {
inline std::atomic<int>& worker_count_slot() {
  static std::atomic<int> count{1};
  return count;
}
}  // namespace detail

inline void set_worker_count(int workers) { detail::worker_count_slot() = std::max(1, workers); }
inline int worker_count() { return detail::worker_count_slot(); }

template <class Body>
void parallel_for(std::size_t count, Body&& body) {
  const auto workers = static_cast<std::size_t>(worker_count());
  if (workers <= 1 || count < 2 * workers) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::jthread> pool;
  pool.reserve(workers);
  const std::size_t block = (count + workers - 1) / workers;
  for (std::size_t w = 0; w < workers; ++w) {
    const std::size_t begin = w * block;
    const std::size_t end = std::min(count, begin + block);
    if (begin >= end) break;
    pool.emplace_back([&, begin, end] {
      try {
        for (std::size_t i = begin; i < end; ++i) body(i);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    });
  }
  pool.clear();
  if (failure) std::rethrow_exception(failure);
}

namespace detail {
inline long double pairwise_sum_range(const double* data, std::size_t n) {
  if (n <= 8) {
    long double s = 0.0L;
    for (std::size_t i = 0; i < n; ++i) s += data[i];
    return s;
  }
  const std::size_t half = n / 2;
  return pairwise_sum_range(data, half) + pairwise_sum_range(data + half, n - half);
}
}  // namespace detail

/// Pairwise summation in extended precision.
inline long double pairwise_sum_extended(std::span<const double> values) {
  return detail::pairwise_sum_range(values.data(), values.size());
}

inline double pairwise_sum(std::span<const double> values) {
  return static_cast<double>(pairwise_sum_extended(values));
}

}  // namespace aniso
