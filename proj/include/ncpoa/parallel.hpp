#pragma once

#include <cstddef>
#include <functional>

namespace ncpoa {

/// Worker count from NC_POA_THREADS; unset or 0 means hardware concurrency.
unsigned thread_count();

/// Runs body(i) for i in [0, count). Indices are handed out dynamically, so
/// callers must write results into slot i to keep output order deterministic.
/// The first exception thrown by any body is rethrown after all workers join.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body);

}  // namespace ncpoa
