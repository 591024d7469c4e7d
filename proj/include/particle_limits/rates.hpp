#ifndef PARTICLE_LIMITS_RATES_HPP
#define PARTICLE_LIMITS_RATES_HPP

#include <cmath>
#include <string>
#include <vector>

#include <json.hpp>

namespace particle_limits {

/// Nonnegative function on [0, inf) from a small set of built-in families,
/// so config files fully determine a run. The tabulated escape hatch covers
/// other shapes with natural-cubic evaluation on [0, s_max] and linear
/// extrapolation beyond.
class RateFunction {
 public:
  enum class Family { constant, linear, power, logistic, tabulated };

  static RateFunction zero() { return constant(0.0); }
  static RateFunction constant(double value);
  static RateFunction linear(double slope);
  /// coefficient * s^exponent, exponent > 0.
  static RateFunction power(double coefficient, double exponent);
  /// Sigmoid plateau: scale / (1 + exp(-steepness * (s - midpoint))).
  static RateFunction logistic(double scale, double midpoint, double steepness);
  static RateFunction tabulated(std::vector<double> values, double s_max);

  double operator()(double s) const {
    switch (family_) {
      case Family::constant:
        return p0_;
      case Family::linear:
        return p0_ * s;
      case Family::power:
        if (p1_ == 2.0) return p0_ * s * s;
        if (p1_ == 3.0) return p0_ * s * s * s;
        return p0_ * std::pow(s, p1_);
      case Family::logistic:
        return p0_ / (1.0 + std::exp(-p2_ * (s - p1_)));
      case Family::tabulated:
        return eval_tabulated(s);
    }
    return 0.0;
  }

  /// Upper bound of the function on [s_lo, s_hi]; exact for the monotone
  /// built-in families, conservative (segment overshoot included) for
  /// tabulated splines. Used to build thinning envelopes.
  double max_on(double s_lo, double s_hi) const;

  Family family() const { return family_; }
  bool is_zero() const { return family_ == Family::constant && p0_ == 0.0; }

  nlohmann::json to_json() const;
  static RateFunction from_json(const nlohmann::json& spec);

 private:
  RateFunction() = default;

  double eval_tabulated(double s) const;

  Family family_ = Family::constant;
  double p0_ = 0, p1_ = 0, p2_ = 0;
  std::vector<double> values_;
  std::vector<double> second_derivatives_;
};

/// Birth and death pair driving the reaction part of the dynamics.
struct RateFunctions {
  RateFunction birth = RateFunction::zero();
  RateFunction death = RateFunction::zero();

  double reaction(double s) const { return birth(s) - death(s); }

  /// Enforces b >= 0, d >= 0 on a probe grid and d(0) = 0 exactly.
  void validate(double probe_max = 1e4) const;

  nlohmann::json to_json() const;
  static RateFunctions from_json(const nlohmann::json& spec);
};

}  // namespace particle_limits

#endif
