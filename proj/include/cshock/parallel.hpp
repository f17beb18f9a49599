#pragma once

#include <algorithm>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace cshock {

/// Worker count: CSHOCK_THREADS when set to a positive integer, else the hardware concurrency.
inline unsigned default_thread_count() {
  if (const char* env = std::getenv("CSHOCK_THREADS")) {
    const long v = std::strtol(env, nullptr, 10);
    if (v > 0) return static_cast<unsigned>(v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

/// Runs body(begin, end) over contiguous chunks of [0, n). Chunk boundaries
/// depend only on n and the thread count, and every index is handled exactly
/// once, so index-keyed results do not depend on scheduling. The first
/// exception thrown by any chunk is rethrown on the calling thread.
template <class Body>
void parallel_chunks(long n, Body&& body, unsigned threads = default_thread_count()) {
  if (n <= 0) return;
  threads = static_cast<unsigned>(std::min<long>(threads, n));
  if (threads <= 1) {
    body(0L, n);
    return;
  }
  std::exception_ptr error;
  std::mutex mu;
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (unsigned w = 0; w < threads; ++w) {
    const long begin = n * long(w) / long(threads);
    const long end = n * long(w + 1) / long(threads);
    pool.emplace_back([&, begin, end] {
      try {
        body(begin, end);
      } catch (...) {
        std::lock_guard<std::mutex> lock(mu);
        if (!error) error = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

template <class Fn>
void parallel_for(long n, Fn&& fn, unsigned threads = default_thread_count()) {
  parallel_chunks(
      n,
      [&](long begin, long end) {
        for (long i = begin; i < end; ++i) fn(i);
      },
      threads);
}

}  // namespace cshock
