#pragma once

// Deterministic data-parallel helper: a static partition of [0, n) into
// contiguous chunks, one thread per chunk. Every per-item result is written
// to its own slot and every reduction combines per-chunk results in chunk
// order, so solver output is bitwise identical for any worker count.

#include <algorithm>
#include <exception>
#include <functional>
#include <thread>
#include <vector>

namespace mrdg {

inline int chunk_count(int n, int nthreads) {
  return std::max(1, std::min(nthreads, n));
}

// Runs fn(chunk, begin, end) over a fixed partition of [0, n). nthreads <= 1
// (or tiny n) runs inline. The first exception in chunk order is rethrown.
inline void parallel_chunks(int n, int nthreads,
                            const std::function<void(int, int, int)>& fn) {
  if (n <= 0) return;
  const int nch = chunk_count(n, nthreads);
  if (nch == 1) {
    fn(0, 0, n);
    return;
  }
  const int base = n / nch, rem = n % nch;
  std::vector<std::exception_ptr> errs(nch);
  std::vector<std::thread> pool;
  pool.reserve(nch);
  int begin = 0;
  for (int t = 0; t < nch; ++t) {
    const int end = begin + base + (t < rem ? 1 : 0);
    pool.emplace_back([&fn, &err = errs[t], t, begin, end] {
      try {
        fn(t, begin, end);
      } catch (...) {
        err = std::current_exception();
      }
    });
    begin = end;
  }
  for (auto& th : pool) th.join();
  for (auto& e : errs)
    if (e) std::rethrow_exception(e);
}

}  // namespace mrdg
