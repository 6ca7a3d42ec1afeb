#pragma once

#include <cstddef>
#include <functional>

namespace volterra {

/// Worker cap: VOLTERRA_THREADS when set to a positive integer, otherwise
/// the hardware concurrency (at least 1).
unsigned thread_limit();

/// Runs body(i) for i in [0, count) on up to thread_limit() threads. Each
/// index is processed exactly once; callers write results into slot i so the
/// outcome does not depend on scheduling. The first exception is rethrown
/// after all workers join. Calls made from inside a worker run serially.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body);

}  // namespace volterra
