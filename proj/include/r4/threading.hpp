#pragma once

// Deterministic task parallelism. Work is split into a fixed number of
// chunks independent of the thread count, so any reduction that walks
// chunk results in order produces identical bits whether run serial or
// parallel.

#include <atomic>
#include <cstddef>
#include <exception>
#include <functional>
#include <thread>
#include <vector>

namespace r4 {

inline int& thread_count_ref() {
  static int n = static_cast<int>(std::thread::hardware_concurrency());
  return n;
}

inline void set_thread_count(int n) { thread_count_ref() = n < 1 ? 1 : n; }
inline int thread_count() { return thread_count_ref() < 1 ? 1 : thread_count_ref(); }

// Runs fn(chunk_index, begin, end) for n items split into n_chunks
// half-open ranges. Chunk boundaries depend only on (n, n_chunks).
inline void parallel_chunks(size_t n, size_t n_chunks,
                            const std::function<void(size_t, size_t, size_t)>& fn) {
  if (n == 0) return;
  if (n_chunks == 0) n_chunks = 1;
  if (n_chunks > n) n_chunks = n;
  const size_t base = n / n_chunks, rem = n % n_chunks;
  auto bounds = [&](size_t c) {
    const size_t b = c * base + (c < rem ? c : rem);
    return std::pair<size_t, size_t>(b, b + base + (c < rem ? 1 : 0));
  };

  const int workers = thread_count();
  if (workers <= 1 || n_chunks == 1) {
    for (size_t c = 0; c < n_chunks; ++c) {
      auto [b, e] = bounds(c);
      fn(c, b, e);
    }
    return;
  }

  std::atomic<size_t> next{0};
  std::exception_ptr err;
  std::atomic<bool> failed{false};
  auto worker = [&] {
    for (;;) {
      const size_t c = next.fetch_add(1);
      if (c >= n_chunks || failed.load()) return;
      auto [b, e] = bounds(c);
      try {
        fn(c, b, e);
      } catch (...) {
        if (!failed.exchange(true)) err = std::current_exception();
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  const int spawn = static_cast<int>(std::min<size_t>(static_cast<size_t>(workers), n_chunks));
  pool.reserve(static_cast<size_t>(spawn - 1));
  for (int i = 1; i < spawn; ++i) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  if (failed.load() && err) std::rethrow_exception(err);
}

// Convenience: parallel loop over [0, n) where per-item work is independent.
inline void parallel_for(size_t n, const std::function<void(size_t)>& fn) {
  const size_t chunks = static_cast<size_t>(thread_count()) * 4;
  parallel_chunks(n, chunks, [&](size_t, size_t b, size_t e) {
    for (size_t i = b; i < e; ++i) fn(i);
  });
}

}  // namespace r4
