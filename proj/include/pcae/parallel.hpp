#pragma once

#include <algorithm>
#include <exception>
#include <functional>
#include <thread>
#include <vector>

namespace pcae {

// Runs fn(begin, end) over disjoint contiguous subranges of [0, count) on up
// to `threads` std::threads. Workers write only to their own slice of any
// shared output, so results are identical for every thread count. The first
// exception thrown by a worker is rethrown on the calling thread.
inline void parallel_for_ranges(
    long count, int threads,
    const std::function<void(long, long)>& fn) {
  if (count <= 0) return;
  int workers = std::max(1, threads);
  workers = static_cast<int>(std::min<long>(workers, count));
  if (workers == 1) {
    fn(0, count);
    return;
  }
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(workers);
  long chunk = (count + workers - 1) / workers;
  for (int t = 0; t < workers; ++t) {
    long begin = t * chunk;
    long end = std::min(count, begin + chunk);
    if (begin >= end) break;
    pool.emplace_back([&, t, begin, end] {
      try {
        fn(begin, end);
      } catch (...) {
        errors[t] = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  for (auto& err : errors) {
    if (err) std::rethrow_exception(err);
  }
}

}  // namespace pcae
