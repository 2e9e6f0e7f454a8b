#pragma once
// Counter-based random numbers and deterministic fan-out.
//
// Every Monte Carlo sample draws its coordinates from a pure function of
// (seed, stream, index), so estimates do not depend on how samples are split
// across threads. Parallel loops only ever combine integer counts or write
// into per-index slots, which keeps results bit-identical for any thread
// count.

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace starkit {

inline constexpr std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Stateless generator keyed by (seed, stream).
class CounterRng {
 public:
  constexpr CounterRng(std::uint64_t seed, std::uint64_t stream = 0)
      : key_(mix64(seed ^ mix64(stream + 0x632be59bd9b4e019ULL))) {}

  constexpr std::uint64_t bits(std::uint64_t index) const { return mix64(key_ ^ mix64(index)); }

  /// Uniform double in [0, 1) with 53 random bits.
  constexpr double uniform(std::uint64_t index) const {
    return static_cast<double>(bits(index) >> 11) * 0x1.0p-53;
  }

 private:
  std::uint64_t key_;
};

/// Thread budget: STARKIT_THREADS if set (>= 1), else hardware concurrency.
inline unsigned thread_budget() {
  if (const char* env = std::getenv("STARKIT_THREADS")) {
    const long v = std::strtol(env, nullptr, 10);
    if (v >= 1) return static_cast<unsigned>(v);
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : hw;
}

/// Runs body(begin, end) over contiguous blocks of [0, n). The first
/// exception thrown by any block is rethrown on the calling thread.
template <class Body>
void parallel_blocks(std::size_t n, Body&& body, unsigned threads = thread_budget()) {
  if (n == 0) return;
  threads = static_cast<unsigned>(std::min<std::size_t>(std::max(1u, threads), n));
  if (threads == 1) {
    body(std::size_t{0}, n);
    return;
  }
  std::vector<std::thread> pool;
  std::exception_ptr failure;
  std::mutex failure_mutex;
  const std::size_t chunk = (n + threads - 1) / threads;
  for (unsigned t = 0; t < threads; ++t) {
    const std::size_t begin = t * chunk;
    const std::size_t end = std::min(n, begin + chunk);
    if (begin >= end) break;
    pool.emplace_back([&, begin, end] {
      try {
        body(begin, end);
      } catch (...) {
        std::lock_guard<std::mutex> lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  if (failure) std::rethrow_exception(failure);
}

/// Counts indices in [0, n) for which pred(i) holds.
template <class Pred>
std::uint64_t parallel_count(std::size_t n, Pred&& pred, unsigned threads = thread_budget()) {
  std::vector<std::uint64_t> partial(std::max(1u, threads), 0);
  std::mutex slot_mutex;
  std::size_t next_slot = 0;
  parallel_blocks(
      n,
      [&](std::size_t begin, std::size_t end) {
        std::uint64_t local = 0;
        for (std::size_t i = begin; i < end; ++i) local += pred(i) ? 1 : 0;
        std::lock_guard<std::mutex> lock(slot_mutex);
        partial[next_slot++] = local;
      },
      threads);
  std::uint64_t total = 0;
  for (auto v : partial) total += v;
  return total;
}

}  // namespace starkit
