#pragma once

#include <cstddef>
#include <functional>

namespace loggle {

/// Worker count to use when the caller passes 0: LOGGLE_DETERMINISTIC=1 forces 1,
/// otherwise the hardware concurrency.
unsigned resolve_threads(unsigned requested);

/// Runs fn(0..count-1) on up to `threads` workers. Each index runs exactly once; results
/// must be written by index so the outcome does not depend on scheduling. The first
/// exception thrown by any task is rethrown after all workers stop.
void parallel_for(std::size_t count, unsigned threads, const std::function<void(std::size_t)>& fn);

/// True when LOGGLE_DETERMINISTIC is set to a non-empty value other than "0".
bool deterministic_mode();

}  // namespace loggle
