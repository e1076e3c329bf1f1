#include "mspec/parallel.hpp"

#include <atomic>
#include <thread>

namespace mspec {

namespace {
std::atomic<int> g_threads{0};
}  // namespace

int thread_count() {
  const int n = g_threads.load(std::memory_order_relaxed);
  if (n > 0) return n;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? static_cast<int>(hw) : 1;
}

void set_thread_count(int n) {
  g_threads.store(n > 0 ? n : 0, std::memory_order_relaxed);
}

void parallel_chunks(
    std::size_t n, std::size_t chunk,
    const std::function<void(std::size_t, std::size_t, std::size_t)>& fn) {
  if (n == 0) return;
  if (chunk == 0) chunk = 1;
  const std::size_t chunks = (n + chunk - 1) / chunk;
  const int workers =
      static_cast<int>(std::min<std::size_t>(chunks, thread_count()));
  if (workers <= 1) {
    for (std::size_t c = 0; c < chunks; ++c) {
      fn(c, c * chunk, std::min(n, (c + 1) * chunk));
    }
    return;
  }
  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    for (;;) {
      const std::size_t c = next.fetch_add(1, std::memory_order_relaxed);
      if (c >= chunks) return;
      fn(c, c * chunk, std::min(n, (c + 1) * chunk));
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(workers - 1);
  for (int t = 1; t < workers; ++t) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();
}

}  // namespace mspec
