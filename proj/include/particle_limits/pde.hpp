#ifndef PARTICLE_LIMITS_PDE_HPP
#define PARTICLE_LIMITS_PDE_HPP

#include <optional>
#include <vector>

#include "particle_limits/profile.hpp"
#include "particle_limits/rates.hpp"

namespace particle_limits {

/// Uniform periodic grid u_m = m / M with an explicit RK4 method-of-lines
/// stepper. Fixed steps must satisfy the diffusive CFL bound dt <= (1/M)^2/2;
/// the adaptive policy additionally shrinks dt with 1 / (1 + max |f'(rho)|).
struct PdeGrid {
  int m = 256;
  std::optional<double> fixed_dt;  // nullopt selects the adaptive policy
  double norm_ceiling = 1e8;
  double dt_floor = 1e-14;

  double spacing() const { return 1.0 / m; }
  double cfl_dt() const { return spacing() * spacing() / 2.0; }
  void validate() const;
};

enum class PdeStatus { resolved, blew_up, step_underflow };

struct PdeSolution {
  PdeStatus status = PdeStatus::resolved;
  int m = 0;
  /// Checkpoint times actually reached (a prefix of the requested ones when
  /// the run blew up first) and the grid values at each.
  std::vector<double> times;
  std::vector<std::vector<double>> values;
  double last_resolved_time = 0.0;
  /// Extrapolated blow-up time; meaningful when status == blew_up.
  double blowup_estimate = 0.0;

  const std::vector<double>& at_time(double t, double tol = 1e-12) const;
};

/// Periodic heat equation d_t rho = d_uu rho from the profile. Status is
/// always resolved; runs the same integrator as the reaction solver with a
/// zero reaction term, so the two agree bit for bit when f == 0.
PdeSolution solve_heat(const Profile& phi, double horizon, const PdeGrid& grid,
                       const std::vector<double>& checkpoints = {});

/// Reaction-diffusion d_t rho = d_uu rho + f(rho) with f = b - d. Stops with
/// status blew_up when the sup norm reaches the ceiling (or when stiffness
/// pushes dt under the floor while the norm is in a certified blow-up climb),
/// carrying an extrapolated blow-up time. A dt underflow outside that regime
/// is reported as step_underflow.
PdeSolution solve_reaction_diffusion(const Profile& phi, const RateFunctions& rates,
                                     double horizon, const PdeGrid& grid,
                                     const std::vector<double>& checkpoints = {});

enum class CriterionVerdict { satisfied, not_satisfied, inconclusive };

/// Checks the classical sufficient condition for reaction blow-up: f convex
/// and strictly positive on [a, infinity) with integral of ds / f(s) finite.
struct BlowupCriterionReport {
  bool convex_on_tail = false;
  bool positive_on_tail = false;
  bool integral_finite = false;
  double tail_start = 0.0;
  CriterionVerdict verdict = CriterionVerdict::not_satisfied;
  /// Power-law exponent fitted to f on the top decade below s_max; the
  /// integral tail converges iff the exponent exceeds 1.
  double fitted_tail_exponent = 0.0;
  bool tail_fit_conclusive = false;
  /// Finite value of the integral when it converges (quadrature + fitted
  /// tail), +inf otherwise.
  double integral_value = 0.0;
};

BlowupCriterionReport check_blowup_criterion(const RateFunctions& rates, double a,
                                             double s_max);

}  // namespace particle_limits

#endif
