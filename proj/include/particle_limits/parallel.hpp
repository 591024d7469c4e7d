#ifndef PARTICLE_LIMITS_PARALLEL_HPP
#define PARTICLE_LIMITS_PARALLEL_HPP

#include <functional>

namespace particle_limits {

/// Worker count: `requested` if positive, else the PARTICLE_LIMITS_THREADS
/// environment variable, else the available hardware parallelism.
int resolve_thread_count(int requested);

/// Runs fn(0..count-1) on a small worker pool. Replicas write into
/// caller-owned slots indexed by replica, so scheduling order never leaks
/// into results. The first exception thrown by a task is rethrown once all
/// workers have stopped.
void parallel_for_replicas(int count, int threads, const std::function<void(int)>& fn);

}  // namespace particle_limits

#endif
