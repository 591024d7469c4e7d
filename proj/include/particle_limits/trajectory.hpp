#ifndef PARTICLE_LIMITS_TRAJECTORY_HPP
#define PARTICLE_LIMITS_TRAJECTORY_HPP

#include <cstdint>
#include <vector>

#include "particle_limits/lattice.hpp"

namespace particle_limits {

struct Snapshot {
  double time = 0.0;
  Configuration config;
};

/// Checkpointed path of a simulation run. Snapshots are right-continuous:
/// the configuration stored at t_k includes any event that fires exactly
/// at t_k.
struct Trajectory {
  std::vector<Snapshot> snapshots;
  std::uint64_t event_count = 0;
};

/// Checkpoint grids must be sorted, nonnegative, and end at or before the
/// horizon. Throws std::invalid_argument otherwise.
void validate_checkpoints(const std::vector<double>& checkpoints, double horizon);

}  // namespace particle_limits

#endif
