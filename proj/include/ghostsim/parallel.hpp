#pragma once

#include <cstddef>
#include <functional>

namespace ghostsim {

/// Worker cap: GHOSTSIM_THREADS if set and positive, otherwise the hardware
/// concurrency (GHOSTSIM_THREADS=0 also means auto). Always >= 1.
std::size_t worker_count();

/// Runs body(i) for i in [0, n) on up to worker_count() threads. Each index
/// is visited exactly once; callers write only to per-index slots so the
/// result does not depend on scheduling. The first exception thrown by any
/// body is rethrown after all workers join.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace ghostsim
