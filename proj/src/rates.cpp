#include "particle_limits/rates.hpp"

#include <cmath>
#include <stdexcept>

namespace particle_limits {

namespace {

/// Natural cubic spline moments on the uniform grid 0..s_max (not periodic).
std::vector<double> natural_spline_moments(const std::vector<double>& y, double h) {
  const int n = static_cast<int>(y.size());
  std::vector<double> m(n, 0.0);
  if (n < 3) return m;
  // Interior system tri(1,4,1) m = rhs on indices 1..n-2, natural ends m=0.
  const int inner = n - 2;
  std::vector<double> c_prime(inner, 0.0), x(inner, 0.0);
  auto rhs = [&](int i) { return 6.0 * (y[i + 1] - 2.0 * y[i] + y[i - 1]) / (h * h); };
  double beta = 4.0;
  x[0] = rhs(1) / beta;
  for (int i = 1; i < inner; ++i) {
    c_prime[i - 1] = 1.0 / beta;
    beta = 4.0 - c_prime[i - 1];
    x[i] = (rhs(i + 1) - x[i - 1]) / beta;
  }
  for (int i = inner - 2; i >= 0; --i) x[i] -= c_prime[i] * x[i + 1];
  for (int i = 0; i < inner; ++i) m[i + 1] = x[i];
  return m;
}

}  // namespace

RateFunction RateFunction::constant(double value) {
  if (value < 0.0) throw std::invalid_argument("rate functions must be nonnegative");
  RateFunction r;
  r.family_ = Family::constant;
  r.p0_ = value;
  return r;
}

RateFunction RateFunction::linear(double slope) {
  if (slope < 0.0) throw std::invalid_argument("linear rate slope must be nonnegative");
  RateFunction r;
  r.family_ = Family::linear;
  r.p0_ = slope;
  return r;
}

RateFunction RateFunction::power(double coefficient, double exponent) {
  if (coefficient < 0.0) throw std::invalid_argument("power rate coefficient must be nonnegative");
  if (exponent <= 0.0) throw std::invalid_argument("power rate exponent must be positive");
  RateFunction r;
  r.family_ = Family::power;
  r.p0_ = coefficient;
  r.p1_ = exponent;
  return r;
}

RateFunction RateFunction::logistic(double scale, double midpoint, double steepness) {
  if (scale < 0.0) throw std::invalid_argument("logistic rate scale must be nonnegative");
  RateFunction r;
  r.family_ = Family::logistic;
  r.p0_ = scale;
  r.p1_ = midpoint;
  r.p2_ = steepness;
  return r;
}

RateFunction RateFunction::tabulated(std::vector<double> values, double s_max) {
  if (values.size() < 2) throw std::invalid_argument("tabulated rate needs >= 2 values");
  if (s_max <= 0.0) throw std::invalid_argument("tabulated rate needs s_max > 0");
  for (double v : values) {
    if (v < 0.0) throw std::invalid_argument("tabulated rate values must be nonnegative");
  }
  RateFunction r;
  r.family_ = Family::tabulated;
  r.p0_ = s_max;
  r.second_derivatives_ =
      natural_spline_moments(values, s_max / (static_cast<double>(values.size()) - 1.0));
  r.values_ = std::move(values);
  return r;
}

double RateFunction::max_on(double s_lo, double s_hi) const {
  switch (family_) {
    case Family::constant:
      return p0_;
    case Family::linear:
    case Family::power:
      return (*this)(s_hi);
    case Family::logistic:
      // Monotone in either direction depending on the steepness sign.
      return std::max((*this)(s_lo), (*this)(s_hi));
    case Family::tabulated: {
      double bound = std::max((*this)(s_lo), (*this)(s_hi));
      const int n = static_cast<int>(values_.size());
      const double h = p0_ / (n - 1);
      const int first = std::max(0, static_cast<int>(s_lo / h));
      const int last = std::min(n - 1, static_cast<int>(s_hi / h) + 1);
      for (int i = first; i <= last; ++i) {
        // Knot value plus the worst cubic overshoot of adjacent segments:
        // |a^3 - a| <= 2 / (3 sqrt 3) ~= 0.385 on [0, 1].
        const double overshoot =
            0.385 * (h * h) / 6.0 *
            (std::abs(second_derivatives_[i]) +
             std::abs(second_derivatives_[std::min(i + 1, n - 1)]));
        bound = std::max(bound, values_[i] + overshoot);
      }
      if (s_hi > p0_) {
        // Linear extrapolation region: monotone, ends covered above.
        bound = std::max(bound, (*this)(s_hi));
      }
      return bound;
    }
  }
  return 0.0;
}

double RateFunction::eval_tabulated(double s) const {
  const int n = static_cast<int>(values_.size());
  const double h = p0_ / (n - 1);
  if (s >= p0_) {
    // Linear extrapolation from the last segment; clamp at zero.
    const double slope = (values_[n - 1] - values_[n - 2]) / h;
    return std::max(0.0, values_[n - 1] + slope * (s - p0_));
  }
  const double scaled = s / h;
  int i = static_cast<int>(scaled);
  if (i < 0) i = 0;
  if (i > n - 2) i = n - 2;
  const double a = (i + 1) - scaled;
  const double b = scaled - i;
  return std::max(0.0, a * values_[i] + b * values_[i + 1] +
                           ((a * a * a - a) * second_derivatives_[i] +
                            (b * b * b - b) * second_derivatives_[i + 1]) *
                               (h * h) / 6.0);
}

nlohmann::json RateFunction::to_json() const {
  nlohmann::json j;
  switch (family_) {
    case Family::constant:
      j["family"] = "constant";
      j["value"] = p0_;
      break;
    case Family::linear:
      j["family"] = "linear";
      j["slope"] = p0_;
      break;
    case Family::power:
      j["family"] = "power";
      j["coefficient"] = p0_;
      j["exponent"] = p1_;
      break;
    case Family::logistic:
      j["family"] = "logistic";
      j["scale"] = p0_;
      j["midpoint"] = p1_;
      j["steepness"] = p2_;
      break;
    case Family::tabulated:
      j["family"] = "tabulated";
      j["values"] = values_;
      j["s_max"] = p0_;
      break;
  }
  return j;
}

RateFunction RateFunction::from_json(const nlohmann::json& spec) {
  if (!spec.is_object() || !spec.contains("family")) {
    throw std::invalid_argument("rate spec must be an object with a \"family\"");
  }
  const std::string family = spec.at("family").get<std::string>();
  if (family == "constant") return constant(spec.at("value").get<double>());
  if (family == "linear") return linear(spec.at("slope").get<double>());
  if (family == "power") {
    const double coefficient =
        spec.contains("coefficient") ? spec.at("coefficient").get<double>() : 1.0;
    return power(coefficient, spec.at("exponent").get<double>());
  }
  if (family == "logistic") {
    return logistic(spec.at("scale").get<double>(), spec.at("midpoint").get<double>(),
                    spec.at("steepness").get<double>());
  }
  if (family == "tabulated") {
    return tabulated(spec.at("values").get<std::vector<double>>(),
                     spec.at("s_max").get<double>());
  }
  throw std::invalid_argument("unknown rate family \"" + family +
                              "\" (expected constant|linear|power|logistic|tabulated)");
}

void RateFunctions::validate(double probe_max) const {
  if (death(0.0) != 0.0) {
    throw std::invalid_argument("death rate must satisfy d(0) = 0");
  }
  for (int i = 0; i <= 64; ++i) {
    const double s = probe_max * double(i) / 64.0;
    if (birth(s) < 0.0 || death(s) < 0.0) {
      throw std::invalid_argument("rate functions must be nonnegative on [0, probe_max]");
    }
  }
}

nlohmann::json RateFunctions::to_json() const {
  return nlohmann::json{{"birth", birth.to_json()}, {"death", death.to_json()}};
}

RateFunctions RateFunctions::from_json(const nlohmann::json& spec) {
  RateFunctions r;
  if (spec.contains("birth")) r.birth = RateFunction::from_json(spec.at("birth"));
  if (spec.contains("death")) r.death = RateFunction::from_json(spec.at("death"));
  r.validate();
  return r;
}

}  // namespace particle_limits
