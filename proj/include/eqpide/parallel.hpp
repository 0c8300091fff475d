#pragma once

#include <cstddef>
#include <functional>

namespace eqpide {

/// Worker count: the explicit override if set, else EQPIDE_THREADS, else the
/// hardware concurrency.
std::size_t worker_count();

/// Overrides the worker count for this process; 0 restores the default.
void set_worker_count(std::size_t n);

/// Runs body(begin, end) over contiguous chunks of [0, n). Chunk boundaries
/// depend only on n and the worker count; callers must write results into
/// per-index slots so output does not depend on scheduling.
void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)>& body);

}  // namespace eqpide
