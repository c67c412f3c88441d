#pragma once

#include <cstddef>
#include <functional>

namespace tflab {

/// TFLAB_THREADS if set to a positive integer, else hardware concurrency.
int default_workers();

/// Calls fn(i) for i in [0, n) on up to `workers` threads. Indices are split
/// into contiguous blocks; callers write results by index so the outcome does
/// not depend on the split. The first exception thrown is rethrown.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn, int workers);

}  // namespace tflab
