#ifndef PARTICLE_LIMITS_PROFILE_HPP
#define PARTICLE_LIMITS_PROFILE_HPP

#include <string>
#include <vector>

#include <json.hpp>

namespace particle_limits {

/// Smooth function on the continuous torus [0,1), used both as an initial
/// profile for samplers and as the initial condition of the reference PDEs.
///
/// Built-in families (constant, cosine, logistic bump) plus a tabulated grid
/// evaluated through a periodic cubic spline, so config files can describe
/// every profile the solvers accept.
class Profile {
 public:
  static Profile constant(double value);
  static Profile cosine(double mean, double amplitude, int mode = 1, double phase = 0.0);
  static Profile logistic_bump(double base, double height, double center,
                               double half_width, double steepness = 10.0);
  static Profile tabulated(std::vector<double> values);

  /// Evaluate at u; any real u is wrapped into [0,1).
  double operator()(double u) const;

  /// Extremes probed on a uniform grid (exact for the built-in families'
  /// practical use; the grid is fine enough for validation purposes).
  double grid_min(int samples = 4096) const;
  double grid_max(int samples = 4096) const;

  const std::string& family_name() const { return name_; }

  nlohmann::json to_json() const;
  static Profile from_json(const nlohmann::json& spec);

 private:
  Profile() = default;

  std::string name_;
  // Family parameters; meaning depends on name_.
  double p0_ = 0, p1_ = 0, p2_ = 0, p3_ = 0;
  int mode_ = 1;
  std::vector<double> values_;
  std::vector<double> second_derivatives_;  // periodic spline coefficients
};

}  // namespace particle_limits

#endif
