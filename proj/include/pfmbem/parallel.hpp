#pragma once

#include <functional>

namespace pfmbem {

/// Worker count used by the library; 0 selects the hardware concurrency.
void set_thread_count(int n);
int thread_count();

/// Calls f(i) for i in [0, n) across the configured workers. Each index is
/// handled exactly once; the first exception is rethrown on the caller.
void parallel_for(int n, const std::function<void(int)>& f);

}  // namespace pfmbem
