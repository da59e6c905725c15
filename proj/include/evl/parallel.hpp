#pragma once

#include <cstddef>
#include <functional>

namespace evl {

/// Worker cap: EVL_LAB_THREADS when set and positive, else hardware concurrency.
std::size_t thread_limit();

/// Runs body(i) for i in [0, n) over up to `threads` workers (0 = thread_limit()).
/// Work is split into contiguous blocks; callers pre-split any randomness so that
/// results do not depend on scheduling. The first exception thrown is rethrown.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body,
                  std::size_t threads = 0);

}  // namespace evl
