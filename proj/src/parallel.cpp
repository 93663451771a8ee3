#include "modev/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace modev {

int default_thread_count() {
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

void parallel_for(std::int64_t count, int threads,
                  const std::function<void(std::int64_t, int)>& body) {
  if (count <= 0) return;
  if (threads <= 0) threads = default_thread_count();
  threads = static_cast<int>(std::min<std::int64_t>(threads, count));
  if (threads == 1) {
    for (std::int64_t i = 0; i < count; ++i) body(i, 0);
    return;
  }
  // Small chunks keep the load balanced without contention on the counter.
  const std::int64_t chunk = std::max<std::int64_t>(1, count / (static_cast<std::int64_t>(threads) * 16));
  std::atomic<std::int64_t> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr error;
  std::int64_t error_index = count;
  std::mutex error_mutex;

  auto work = [&](int worker) {
    while (!failed.load(std::memory_order_relaxed)) {
      const std::int64_t begin = next.fetch_add(chunk);
      if (begin >= count) return;
      const std::int64_t end = std::min(count, begin + chunk);
      std::int64_t i = begin;
      try {
        for (; i < end; ++i) body(i, worker);
      } catch (...) {
        // Keep the lowest failing index among those observed.
        std::lock_guard<std::mutex> lock(error_mutex);
        if (i < error_index) {
          error_index = i;
          error = std::current_exception();
        }
        failed = true;
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(threads - 1);
  for (int w = 1; w < threads; ++w) pool.emplace_back(work, w);
  work(0);
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace modev
