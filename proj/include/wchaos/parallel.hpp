#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <functional>
#include <thread>
#include <vector>

namespace wchaos::detail {

inline unsigned default_threads() {
  unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1u : std::min(hw, 8u);
}

// Static contiguous partition of [0, count) across workers.  Each chunk owns a
// disjoint range and the caller combines nothing across chunks, so the result
// is independent of the worker count.  The first exception thrown by any
// worker is rethrown on the calling thread with its original type.
inline void parallel_for_chunks(std::size_t count, unsigned threads,
                                const std::function<void(std::size_t, std::size_t)>& chunk) {
  if (count == 0) return;
  if (threads == 0) threads = default_threads();
  const std::size_t workers = std::min<std::size_t>(threads, count);
  if (workers <= 1) {
    chunk(0, count);
    return;
  }
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(workers);
  pool.reserve(workers);
  const std::size_t base = count / workers;
  const std::size_t rem = count % workers;
  std::size_t begin = 0;
  for (std::size_t w = 0; w < workers; ++w) {
    const std::size_t len = base + (w < rem ? 1 : 0);
    pool.emplace_back(
        [&chunk, &errors, w](std::size_t b, std::size_t e) {
          try {
            chunk(b, e);
          } catch (...) {
            errors[w] = std::current_exception();
          }
        },
        begin, begin + len);
    begin += len;
  }
  for (auto& t : pool) t.join();
  for (const auto& err : errors) {
    if (err) std::rethrow_exception(err);
  }
}

}  // namespace wchaos::detail
