#pragma once

#include <cstddef>
#include <functional>

namespace cafd {

/// Worker cap: CAFD_EVAL_THREADS when set to a positive integer, otherwise
/// the hardware concurrency (at least 1).
std::size_t worker_count();

/// Runs fn(i) for i in [0, n) on up to worker_count() threads. Each index is
/// visited exactly once; callers write results into per-index slots and
/// reduce afterwards in index order. The first exception thrown by any task
/// is rethrown on the calling thread.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace cafd
