#pragma once

#include <cstddef>
#include <functional>

namespace tnlab {

/// Worker count: TNLAB_THREADS when set (clamped to >= 1), otherwise the
/// hardware concurrency.
int thread_count();

/// Runs fn(i) for i in [0, n). Work is chunked over thread_count() threads;
/// fn must write results into caller-owned, index-addressed storage so the
/// outcome does not depend on scheduling. Exceptions from workers are
/// rethrown on the calling thread.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

} // namespace tnlab
