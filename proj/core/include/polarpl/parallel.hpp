#pragma once

#include <cstddef>
#include <functional>

namespace polarpl {

// Number of worker threads: hardware concurrency capped by POLAR_PL_THREADS.
int worker_count();

// Runs fn(i) for i in [0, n). Work is split into contiguous index ranges so
// every per-index reduction keeps its fixed (sequential) order; results are
// bitwise identical for any thread count.
void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)>& range_fn);

inline void parallel_for_each(std::size_t n, const std::function<void(std::size_t)>& fn) {
  parallel_for(n, [&](std::size_t b, std::size_t e) {
    for (std::size_t i = b; i < e; ++i) fn(i);
  });
}

}  // namespace polarpl
