#pragma once

#include <cstddef>
#include <functional>

namespace logitpfa {

/// Worker count: LOGITPFA_THREADS if set to a positive integer, otherwise
/// the hardware concurrency (at least 1).
std::size_t thread_count();

/// Runs body(i) for i in [0, count) on up to `threads` workers. Work items
/// are claimed dynamically; callers write results by index, so output does
/// not depend on scheduling. The first exception thrown by any body is
/// rethrown after all workers join.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body,
                  std::size_t threads = thread_count());

}  // namespace logitpfa
