#pragma once

#include <cstddef>
#include <functional>

namespace qbm {

/// Worker count: hardware concurrency capped by QBM_THREADS (if set).
std::size_t thread_count();

/// Runs body(i) for i in [0, n). Iterations must only write to their own
/// output slots; the result is then independent of the schedule.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace qbm
