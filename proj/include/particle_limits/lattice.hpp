#ifndef PARTICLE_LIMITS_LATTICE_HPP
#define PARTICLE_LIMITS_LATTICE_HPP

#include <cstdint>
#include <functional>
#include <utility>
#include <vector>

#include "particle_limits/profile.hpp"
#include "particle_limits/rng.hpp"

namespace particle_limits {

/// Arithmetic on the discrete torus {0, ..., n-1}; site n is site 0.
struct Torus {
  int n;
  int right(int x) const { return x + 1 == n ? 0 : x + 1; }
  int left(int x) const { return x == 0 ? n - 1 : x - 1; }
};

enum class OccupationKind { exclusion, unbounded };

/// Per-site occupation numbers on the discrete torus.
struct Configuration {
  int n = 0;
  OccupationKind kind = OccupationKind::exclusion;
  std::vector<std::int64_t> occupations;

  std::int64_t total_particles() const;
  std::int64_t max_occupation() const;

  /// Throws std::invalid_argument if the occupation values violate the kind
  /// ({0,1} for exclusion, >= 0 for unbounded) or the length differs from n.
  void validate() const;
};

/// Atomic measure with weight eta(x)/n at position x/n.
struct EmpiricalMeasure {
  int n = 0;
  std::vector<double> weights;

  double mass() const;
  /// Integral of a test function: (1/n) sum psi(x/n) eta(x).
  double integrate(const std::function<double(double)>& test) const;
  std::vector<std::pair<double, double>> atoms() const;
};

/// Occupations rescaled by 1/ell and linearly interpolated between the grid
/// points x/n, periodic across the seam.
struct DensityField {
  int n = 0;
  double ell = 1.0;
  std::vector<double> values;

  double operator()(double u) const;
};

/// Product Bernoulli sample: site x occupied with probability phi(x/n).
/// Rejects phi values outside [0,1] at any grid point.
Configuration sample_initial_exclusion(int n, const Profile& phi, RngStream& stream);

/// Product Poisson sample: eta(x) ~ Poisson(ell * phi(x/n)). Rejects
/// negative phi at any grid point.
Configuration sample_initial_density(int n, double ell, const Profile& phi,
                                     RngStream& stream);

EmpiricalMeasure empirical_measure(const Configuration& c);

DensityField density_field(const Configuration& c, double ell);

/// Wraps precomputed grid values (e.g. one PDE time slice) as a field.
DensityField grid_field(std::vector<double> values);

/// Max of |a - b| over the union of both breakpoint grids refined 4x.
double sup_norm_distance(const DensityField& a, const DensityField& b);
double sup_norm_distance(const DensityField& a, const Profile& b);

}  // namespace particle_limits

#endif
