#pragma once

#include <cstddef>
#include <functional>

namespace radloc {

/// Number of workers to use: `requested` if > 0, else the RADLOC_THREADS
/// environment variable, else 1.
int resolve_threads(int requested = 0);

/// Runs fn(i) for i in [0, n) on up to `threads` workers with static
/// partitioning. Callers index into preallocated output slots, so results
/// never depend on scheduling.
void parallel_for(std::size_t n, int threads,
                  const std::function<void(std::size_t)>& fn);

}  // namespace radloc
