#ifndef PARTICLE_LIMITS_SSEP_HPP
#define PARTICLE_LIMITS_SSEP_HPP

#include <vector>

#include "particle_limits/lattice.hpp"
#include "particle_limits/rng.hpp"
#include "particle_limits/trajectory.hpp"

namespace particle_limits {

struct SsepParams {
  int n = 0;
  double horizon = 0.0;
  std::vector<double> checkpoints;

  void validate() const;
};

/// Exact simulation of the symmetric simple exclusion process on the torus:
/// every edge (x, x+1) swaps its two occupations at rate n^2.
///
/// Only discrepant edges (eta(x) != eta(x+1)) change the state, so the loop
/// draws from the aggregate rate n^2 * #discrepant and picks a discrepant
/// edge uniformly, which is distributionally identical to running all n edge
/// clocks.
Trajectory ssep_run(const Configuration& init, const SsepParams& params,
                    RngStream& stream);

/// Exact time-t distribution over all 2^n configurations, indexed by the
/// bitmask sum eta(x) 2^x. Uniformization of the full generator, truncated
/// once the neglected Poisson tail mass drops below 1e-12.
struct SsepDistribution {
  int n = 0;
  std::vector<double> probabilities;
  double truncation_error = 0.0;
};

/// Brute-force verifier; rejects n > 6.
SsepDistribution ssep_step_distribution_oracle(const Configuration& init, double t);

/// Bitmask of a configuration, for indexing oracle tables.
std::uint32_t configuration_bits(const Configuration& c);

}  // namespace particle_limits

#endif
