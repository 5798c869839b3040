#pragma once

namespace airyproc {

/// Selects the OpenMP kernel or its serial reference. Both produce
/// bit-identical results: every output element is computed by one thread in
/// a fixed order, and reductions are taken in index order.
enum class Execution { kSerial, kParallel };

/// Environment variable consulted when no explicit thread count is set.
inline constexpr const char* kThreadsEnv = "AIRYPROC_THREADS";

/// Sets the OpenMP team size. 0 resolves from kThreadsEnv, then from the
/// hardware. Returns the count in effect.
int set_threads(int requested);

/// Current OpenMP team size.
int current_threads();

}  // namespace airyproc
