#pragma once

#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace klemu {

/// Number of workers to use when the caller passes 0 ("auto").
inline int resolve_thread_count(int requested) {
  if (requested > 0) return requested;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

/// Run body(i) for i in [0, n) across `threads` workers. Work is handed out
/// through a shared atomic counter, so uneven per-item cost balances itself.
/// The first exception thrown by any worker stops the pool and is rethrown
/// on the calling thread.
template <typename Body>
void parallel_for(std::size_t n, int threads, Body&& body) {
  threads = resolve_thread_count(threads);
  if (n == 0) return;
  if (threads == 1 || n == 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }

  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr error;
  std::mutex error_mutex;

  auto worker = [&] {
    while (!failed.load(std::memory_order_relaxed)) {
      const std::size_t i = next.fetch_add(1, std::memory_order_relaxed);
      if (i >= n) return;
      try {
        body(i);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
        failed.store(true, std::memory_order_relaxed);
        return;
      }
    }
  };

  const int pool = static_cast<int>(std::min<std::size_t>(n, static_cast<std::size_t>(threads)));
  std::vector<std::thread> team;
  team.reserve(static_cast<std::size_t>(pool));
  for (int t = 0; t < pool; ++t) team.emplace_back(worker);
  for (auto& th : team) th.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace klemu
