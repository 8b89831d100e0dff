#pragma once

// Deterministic parallel primitives.
//
// Work is split into fixed-size blocks whose boundaries depend only on the
// problem size, never on the worker count. Reductions sum each block with a
// pairwise tree and then combine the block partials with the same pairwise
// tree, so every result is bit-identical for any number of workers.

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace steinlab {

namespace detail {

inline std::atomic<unsigned>& worker_setting() {
  static std::atomic<unsigned> workers{[] {
    if (const char* env = std::getenv("STEINLAB_THREADS")) {
      const long v = std::strtol(env, nullptr, 10);
      if (v > 0) return static_cast<unsigned>(v);
    }
    return std::max(1u, std::thread::hardware_concurrency());
  }()};
  return workers;
}

}  // namespace detail

inline constexpr std::size_t kBlockSize = 4096;
inline constexpr std::size_t kPairwiseLeaf = 32;

[[nodiscard]] inline unsigned worker_count() noexcept { return detail::worker_setting().load(); }

inline void set_worker_count(unsigned workers) noexcept {
  detail::worker_setting().store(std::max(1u, workers));
}

/// Runs fn(b) for every b in [0, count). Calls are distributed over the
/// configured workers; fn must only write to locations owned by b.
template <class Fn>
void parallel_for(std::size_t count, Fn&& fn) {
  const unsigned workers = std::min<std::size_t>(worker_count(), count);
  if (workers <= 1 || count < 2) {
    for (std::size_t b = 0; b < count; ++b) fn(b);
    return;
  }
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::jthread> pool;
  pool.reserve(workers);
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      const std::size_t lo = count * w / workers;
      const std::size_t hi = count * (w + 1) / workers;
      try {
        for (std::size_t b = lo; b < hi; ++b) fn(b);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    });
  }
  pool.clear();
  if (failure) std::rethrow_exception(failure);
}

/// Runs fn(lo, hi) over fixed kBlockSize chunks of [0, n).
template <class Fn>
void parallel_blocks(std::size_t n, Fn&& fn) {
  const std::size_t blocks = (n + kBlockSize - 1) / kBlockSize;
  if (blocks <= 1) {
    if (n > 0) fn(std::size_t{0}, n);
    return;
  }
  parallel_for(blocks, [&](std::size_t b) {
    fn(b * kBlockSize, std::min(n, (b + 1) * kBlockSize));
  });
}

/// Pairwise sum of term(k) for k in [lo, hi); the split points depend only
/// on lo and hi.
template <class Term>
[[nodiscard]] double pairwise_sum(std::size_t lo, std::size_t hi, const Term& term) {
  const std::size_t n = hi - lo;
  if (n <= kPairwiseLeaf) {
    double acc = 0.0;
    for (std::size_t k = lo; k < hi; ++k) acc += term(k);
    return acc;
  }
  const std::size_t mid = lo + n / 2;
  return pairwise_sum(lo, mid, term) + pairwise_sum(mid, hi, term);
}

/// Deterministic sum of term(k), k in [0, n): blocked, parallel, pairwise.
template <class Term>
[[nodiscard]] double deterministic_sum(std::size_t n, const Term& term) {
  const std::size_t blocks = (n + kBlockSize - 1) / kBlockSize;
  if (blocks <= 1) return pairwise_sum(0, n, term);
  std::vector<double> partial(blocks);
  parallel_for(blocks, [&](std::size_t b) {
    partial[b] = pairwise_sum(b * kBlockSize, std::min(n, (b + 1) * kBlockSize), term);
  });
  return pairwise_sum(0, blocks, [&](std::size_t b) { return partial[b]; });
}

}  // namespace steinlab
