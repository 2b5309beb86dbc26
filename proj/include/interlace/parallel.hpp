#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

#include "interlace/rng.hpp"

namespace interlace {

/// Samples per reduction chunk. Fixed so the merge tree never depends on the
/// worker count.
inline constexpr std::size_t kChunkSize = 256;

/// Runs `body(index, rng, acc)` for index in [0, n) where every index gets the
/// RNG stream (seed, index). Chunk accumulators are merged in chunk order, so
/// the result is identical for any worker count.
template <class Acc, class Body>
Acc run_samples(std::size_t n, std::uint64_t seed, int workers, Body&& body, Acc prototype = Acc{}) {
  const std::size_t chunks = (n + kChunkSize - 1) / kChunkSize;
  std::vector<Acc> partial(chunks, prototype);
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;

  auto worker = [&] {
    for (;;) {
      const std::size_t c = next.fetch_add(1);
      if (c >= chunks) return;
      try {
        const std::size_t end = std::min(n, (c + 1) * kChunkSize);
        for (std::size_t i = c * kChunkSize; i < end; ++i) {
          Rng rng(seed, i);
          body(i, rng, partial[c]);
        }
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next.store(chunks);
        return;
      }
    }
  };

  const int n_workers = std::max(1, std::min<int>(workers, static_cast<int>(chunks)));
  if (n_workers == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(static_cast<std::size_t>(n_workers));
    for (int w = 0; w < n_workers; ++w) pool.emplace_back(worker);
  }
  if (failure) std::rethrow_exception(failure);

  Acc total = prototype;
  for (const auto& p : partial) total.merge(p);
  return total;
}

}  // namespace interlace
