#pragma once

namespace confsplat {

/// Number of worker threads used by the row-parallel kernels (>= 1).
int thread_count();

/// Sets the worker thread count; values < 1 select the runtime default.
void set_thread_count(int n);

}  // namespace confsplat
