#pragma once

#include <cstddef>
#include <functional>
#include <vector>

namespace mspec {

// Global worker count used by the data-parallel helpers. 0 means "hardware
// concurrency". The value only changes how chunks are scheduled onto
// threads, never how work is partitioned, so results are identical for any
// setting.
int thread_count();
void set_thread_count(int n);

// Default work-partition size for cheap per-item loops.
inline constexpr std::size_t kParallelChunk = 4096;

// Runs fn(chunk_index, begin, end) for every chunk of the fixed partition of
// [0, n) into ranges of `chunk` items. The partition depends only on n and
// chunk, never on the thread count; each chunk writes its own slot, so
// callers that reduce chunk results in chunk order get bit-identical answers
// regardless of schedule.
void parallel_chunks(
    std::size_t n, std::size_t chunk,
    const std::function<void(std::size_t, std::size_t, std::size_t)>& fn);

// Fixed-partition parallel reduction: combine(acc, chunk_result) is applied
// sequentially in chunk order on the calling thread.
template <typename T, typename ChunkFn, typename CombineFn>
T parallel_reduce(std::size_t n, T init, ChunkFn chunk_fn, CombineFn combine,
                  std::size_t chunk = kParallelChunk) {
  if (n == 0) return init;
  const std::size_t chunks = (n + chunk - 1) / chunk;
  std::vector<T> partial(chunks, init);
  parallel_chunks(n, chunk,
                  [&](std::size_t c, std::size_t begin, std::size_t end) {
                    partial[c] = chunk_fn(begin, end);
                  });
  T acc = init;
  for (std::size_t c = 0; c < chunks; ++c) acc = combine(acc, partial[c]);
  return acc;
}

}  // namespace mspec
