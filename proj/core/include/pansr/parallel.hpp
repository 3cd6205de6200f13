#pragma once

#include <cstddef>
#include <functional>

namespace pansr {

/// Number of worker threads used by parallel_for. Defaults to the core count.
int thread_count();
void set_thread_count(int n);

/// Runs fn(i) for i in [0, n). Each index must write only to its own output
/// slot; callers reduce afterwards in index order so results do not depend on
/// the thread count. The exception thrown by the lowest failing index is
/// rethrown.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace pansr
