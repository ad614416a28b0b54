#pragma once

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace sblab {

/// Trials are cut into chunks of this size regardless of the thread count;
/// chunk results are merged in chunk order, so floating-point reductions are
/// bit-identical for any number of threads.
inline constexpr std::uint64_t kTrialChunk = 4096;

struct MonteCarlo {
  std::uint64_t trials = 100000;
  std::uint64_t seed = 0;
  unsigned threads = 1;
};

/// Resolves a requested thread count; 0 means "auto".
inline unsigned resolve_threads(unsigned requested) {
  if (requested != 0) return requested;
  return std::max(1u, std::thread::hardware_concurrency());
}

/// Runs `chunk_fn(begin, end)` over [0, trials) in fixed-size chunks and folds
/// the per-chunk results left to right with `merge(acc, chunk_result)`.
template <class Acc, class ChunkFn, class Merge>
Acc chunked_reduce(std::uint64_t trials, unsigned threads, Acc init,
                   ChunkFn&& chunk_fn, Merge&& merge) {
  const std::uint64_t chunks = (trials + kTrialChunk - 1) / kTrialChunk;
  std::vector<Acc> partial(chunks, init);

  std::atomic<std::uint64_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;

  auto worker = [&] {
    for (;;) {
      const std::uint64_t c = next.fetch_add(1);
      if (c >= chunks) return;
      const std::uint64_t begin = c * kTrialChunk;
      const std::uint64_t end = std::min(trials, begin + kTrialChunk);
      try {
        partial[c] = chunk_fn(begin, end);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next.store(chunks);
        return;
      }
    }
  };

  const unsigned n = std::min<std::uint64_t>(resolve_threads(threads),
                                             std::max<std::uint64_t>(chunks, 1));
  if (n <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(n);
    for (unsigned t = 0; t < n; ++t) pool.emplace_back(worker);
  }
  if (failure) std::rethrow_exception(failure);

  Acc acc = std::move(init);
  for (auto& p : partial) merge(acc, p);
  return acc;
}

}  // namespace sblab
