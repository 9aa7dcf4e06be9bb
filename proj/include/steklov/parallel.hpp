#pragma once

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <functional>
#include <string>
#include <thread>
#include <vector>

namespace steklov {

namespace detail {
inline std::atomic<int>& thread_setting() {
  static std::atomic<int> n{0};
  return n;
}
}  // namespace detail

/// Worker count for element loops. Explicit setting wins, then STEKLOV_THREADS, then 1.
inline int thread_count() {
  int n = detail::thread_setting().load();
  if (n > 0) return n;
  if (const char* env = std::getenv("STEKLOV_THREADS")) {
    try {
      n = std::stoi(env);
    } catch (...) {
      n = 0;
    }
    if (n > 0) return n;
  }
  return 1;
}

inline void set_thread_count(int n) { detail::thread_setting().store(std::max(0, n)); }

/// Splits [0, n) into contiguous chunks, one per worker, and runs body(chunk, begin, end).
/// Chunk c always covers a lower index range than chunk c+1, so concatenating per-chunk
/// results in chunk order reproduces the serial ordering.
inline int parallel_chunks(std::size_t n, const std::function<void(int, std::size_t, std::size_t)>& body) {
  const int workers = static_cast<int>(std::clamp<std::size_t>(thread_count(), 1, std::max<std::size_t>(n, 1)));
  const std::size_t step = (n + workers - 1) / std::max(workers, 1);
  if (workers == 1) {
    body(0, 0, n);
    return 1;
  }
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(workers);
  pool.reserve(workers);
  for (int c = 0; c < workers; ++c) {
    const std::size_t b = std::min(n, c * step);
    const std::size_t e = std::min(n, b + step);
    pool.emplace_back([&body, &errors, c, b, e] {
      try {
        body(c, b, e);
      } catch (...) {
        errors[c] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& err : errors)
    if (err) std::rethrow_exception(err);
  return workers;
}

}  // namespace steklov
