#ifndef PARTICLE_LIMITS_BDRW_HPP
#define PARTICLE_LIMITS_BDRW_HPP

#include <cstdint>
#include <optional>
#include <vector>

#include "particle_limits/lattice.hpp"
#include "particle_limits/rates.hpp"
#include "particle_limits/rng.hpp"
#include "particle_limits/trajectory.hpp"

namespace particle_limits {

/// Four-channel dynamics on the torus, per site x:
///   rate n^2 eta(x)            particle jumps x -> x+1
///   rate n^2 eta(x)            particle jumps x -> x-1
///   rate ell * b(eta(x)/ell)   particle created at x
///   rate ell * d(eta(x)/ell)   particle destroyed at x
struct BdrwParams {
  int n = 0;
  double ell = 1.0;
  double horizon = 0.0;
  std::vector<double> checkpoints;
  /// Explosion threshold on the max occupation; the run stops (Exploded)
  /// once any site reaches it.
  double cap = 1e12;
  std::uint64_t event_budget = 2'000'000'000;

  void validate() const;
};

enum class RunStatus { completed, exploded, budget_exhausted };

struct ThresholdHit {
  double threshold = 0.0;  // occupation level y_j of the ladder
  double time = 0.0;       // first time max occupation reached it
};

struct RunOutcome {
  RunStatus status = RunStatus::completed;
  Trajectory trajectory;
  /// First-hit times of the geometric threshold ladder y_j = ell * 2^j.
  std::vector<ThresholdHit> threshold_hits;
  /// Blow-up time extrapolated from the ladder; present for exploded runs.
  std::optional<double> tau_estimate;
  double final_time = 0.0;
  std::int64_t final_max_occupation = 0;
};

/// Sum over sites of all four channel rates.
double bdrw_total_rate(const Configuration& c, const RateFunctions& rates, int n,
                       double ell);

RunOutcome bdrw_run(const Configuration& init, const RateFunctions& rates,
                    const BdrwParams& params, RngStream& stream);

/// Exact time-t distribution of the dynamics truncated to occupations
/// 0..occupancy_cap per site; transitions leaving the box are redirected to
/// one absorbing boundary state whose mass is reported. Comparisons against
/// simulation are valid when boundary_mass is small (< 1e-4).
struct TruncatedDistribution {
  int n = 0;
  int occupancy_cap = 0;
  std::vector<double> probabilities;  // indexed by state_index(); last = boundary
  double boundary_mass = 0.0;
  double truncation_error = 0.0;

  std::size_t state_index(const std::vector<std::int64_t>& occupations) const;
  std::size_t boundary_index() const { return probabilities.size() - 1; }
};

/// Brute-force verifier; rejects n > 3 or occupancy_cap > 8.
TruncatedDistribution bdrw_small_oracle(const Configuration& init,
                                        const RateFunctions& rates, int n, double ell,
                                        double t, int occupancy_cap);

}  // namespace particle_limits

#endif
