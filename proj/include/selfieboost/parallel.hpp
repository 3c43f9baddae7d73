#pragma once

#include <algorithm>
#include <cstddef>
#include <thread>
#include <vector>

namespace selfieboost {

// Full-dataset sweeps are split into fixed chunks of kReduceChunk rows.
// Reductions sum inside each chunk in index order, then add the chunk
// partials in ascending chunk order, so the result does not depend on the
// number of threads.
inline constexpr std::size_t kReduceChunk = 1024;

inline std::size_t chunk_count(std::size_t n) { return (n + kReduceChunk - 1) / kReduceChunk; }

/// Calls fn(chunk, begin, end) for every chunk of [0, n), sharding chunks
/// round-robin over `threads` workers.
template <typename Fn>
void for_each_chunk(std::size_t n, unsigned threads, Fn&& fn) {
  const std::size_t chunks = chunk_count(n);
  const auto run = [&](std::size_t first, std::size_t stride) {
    for (std::size_t c = first; c < chunks; c += stride) {
      const std::size_t begin = c * kReduceChunk;
      fn(c, begin, std::min(n, begin + kReduceChunk));
    }
  };
  const std::size_t workers = std::min<std::size_t>(std::max(threads, 1u), chunks);
  if (workers <= 1) {
    run(0, 1);
    return;
  }
  std::vector<std::jthread> pool;
  pool.reserve(workers - 1);
  for (std::size_t w = 1; w < workers; ++w) pool.emplace_back(run, w, workers);
  run(0, workers);
}

/// Deterministic sum of term(i) over [0, n).
template <typename Term>
double chunked_sum(std::size_t n, unsigned threads, Term&& term) {
  std::vector<double> partial(chunk_count(n), 0.0);
  for_each_chunk(n, threads, [&](std::size_t c, std::size_t begin, std::size_t end) {
    double acc = 0.0;
    for (std::size_t i = begin; i < end; ++i) acc += term(i);
    partial[c] = acc;
  });
  double total = 0.0;
  for (double p : partial) total += p;
  return total;
}

}  // namespace selfieboost
