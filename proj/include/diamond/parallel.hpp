#pragma once

#include <cstddef>
#include <functional>

namespace diamonds {

/// Worker count: DIAMOND_THREADS if set to a positive integer, otherwise the
/// hardware concurrency (at least 1).
int thread_count();

/// Runs body(i) for i in [0, n) on up to thread_count() threads. Work is split
/// into contiguous blocks; callers write results by index and reduce them in
/// index order, so the outcome does not depend on the thread count.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace diamonds
