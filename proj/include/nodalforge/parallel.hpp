#pragma once

#include <functional>

namespace nodalforge {

// Worker threads for per-point kernels. 0 means NODALFORGE_THREADS from the environment, else 1.
void set_thread_count(int n);
int thread_count();

// Calls body(i) for i in [0, n), split into contiguous chunks over thread_count() threads.
void parallel_for(int n, const std::function<void(int)>& body);

}  // namespace nodalforge
