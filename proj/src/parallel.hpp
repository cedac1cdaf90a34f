#pragma once

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <exception>
#include <limits>
#include <mutex>
#include <optional>
#include <thread>
#include <vector>

#include "dunkl/error.hpp"

namespace dunkl::detail {

inline int resolve_threads(int requested) {
  if (requested > 0) return requested;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

/// Runs worker(i) for i in [0, count) over `threads` threads. Each thread builds its
/// own worker via make_worker(). If several indices fail, the failure with the smallest
/// index is rethrown, so the outcome does not depend on scheduling.
template <class MakeWorker>
void for_each_index(std::int64_t count, int threads, MakeWorker make_worker) {
  const int n_threads = static_cast<int>(std::min<std::int64_t>(resolve_threads(threads), std::max<std::int64_t>(count, 1)));
  std::atomic<std::int64_t> next{0};
  std::atomic<std::int64_t> first_failure{std::numeric_limits<std::int64_t>::max()};
  std::mutex mu;
  std::exception_ptr failure;

  auto record = [&](std::int64_t i, std::exception_ptr e) {
    std::lock_guard<std::mutex> lock(mu);
    if (i < first_failure.load()) {
      first_failure.store(i);
      failure = std::move(e);
    }
  };

  auto body = [&] {
    std::optional<decltype(make_worker())> worker;
    try {
      worker.emplace(make_worker());
    } catch (...) {
      record(-1, std::current_exception());
      return;
    }
    for (;;) {
      const std::int64_t i = next.fetch_add(1);
      if (i >= count || i > first_failure.load()) return;
      try {
        (*worker)(i);
      } catch (...) {
        record(i, std::current_exception());
      }
    }
  };

  if (n_threads <= 1) {
    body();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(n_threads));
    for (int t = 0; t < n_threads; ++t) pool.emplace_back(body);
    for (auto& th : pool) th.join();
  }
  if (failure) std::rethrow_exception(failure);
}

}  // namespace dunkl::detail
