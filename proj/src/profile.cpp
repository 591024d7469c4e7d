#include "particle_limits/profile.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace particle_limits {

namespace {

double wrap_unit(double u) {
  double w = u - std::floor(u);
  if (w >= 1.0) w = 0.0;  // guards u = -1e-17 style roundoff
  return w;
}

/// Second derivatives of the periodic natural cubic spline through values on
/// the uniform grid x_i = i/n. Cyclic tridiagonal system solved with the
/// Sherman-Morrison correction of the Thomas algorithm.
std::vector<double> periodic_spline_moments(const std::vector<double>& y) {
  const int n = static_cast<int>(y.size());
  const double h = 1.0 / n;
  std::vector<double> rhs(n);
  for (int i = 0; i < n; ++i) {
    const double prev = y[(i + n - 1) % n];
    const double next = y[(i + 1) % n];
    rhs[i] = 6.0 * (next - 2.0 * y[i] + prev) / (h * h);
  }
  if (n == 1) return {0.0};
  if (n == 2) {
    // Degenerate cycle: system is 4 m_i + 2 m_j = rhs_i.
    const double m0 = (2.0 * rhs[0] - rhs[1]) / 6.0;
    const double m1 = (2.0 * rhs[1] - rhs[0]) / 6.0;
    return {m0, m1};
  }

  auto solve_tridiagonal = [&](const std::vector<double>& d) {
    std::vector<double> c_prime(n - 1), x(n - 1);
    double beta = 4.0;
    x[0] = d[0] / beta;
    for (int i = 1; i < n - 1; ++i) {
      c_prime[i - 1] = 1.0 / beta;
      beta = 4.0 - c_prime[i - 1];
      x[i] = (d[i] - x[i - 1]) / beta;
    }
    for (int i = n - 3; i >= 0; --i) x[i] -= c_prime[i] * x[i + 1];
    return x;
  };

  // Cyclic system A m = rhs with A = tri(1,4,1) + corner ones. Write
  // A = B + u v^T with u = e_0 + e_{n-1} worked through two solves on the
  // (n-1)-sized reduced system (standard cyclic reduction).
  std::vector<double> d1(rhs.begin(), rhs.end() - 1);
  std::vector<double> u(n - 1, 0.0);
  u[0] = 1.0;
  u[n - 2] = 1.0;
  const auto z = solve_tridiagonal(d1);
  const auto w = solve_tridiagonal(u);
  // Last unknown from the closing row: m_{n-1}(4) + m_0 + m_{n-2} = rhs_{n-1}.
  const double numerator = rhs[n - 1] - z[0] - z[n - 2];
  const double denominator = 4.0 - w[0] - w[n - 2];
  const double m_last = numerator / denominator;
  std::vector<double> m(n);
  for (int i = 0; i < n - 1; ++i) m[i] = z[i] - m_last * w[i];
  m[n - 1] = m_last;
  return m;
}

}  // namespace

Profile Profile::constant(double value) {
  Profile p;
  p.name_ = "constant";
  p.p0_ = value;
  return p;
}

Profile Profile::cosine(double mean, double amplitude, int mode, double phase) {
  if (mode < 1) throw std::invalid_argument("cosine profile mode must be >= 1");
  Profile p;
  p.name_ = "cosine";
  p.p0_ = mean;
  p.p1_ = amplitude;
  p.p2_ = phase;
  p.mode_ = mode;
  return p;
}

Profile Profile::logistic_bump(double base, double height, double center,
                               double half_width, double steepness) {
  Profile p;
  p.name_ = "logistic";
  p.p0_ = base;
  p.p1_ = height;
  p.p2_ = center;
  p.p3_ = half_width;
  p.mode_ = 1;
  p.values_ = {steepness};
  return p;
}

Profile Profile::tabulated(std::vector<double> values) {
  if (values.size() < 2) {
    throw std::invalid_argument("tabulated profile needs at least 2 grid values");
  }
  Profile p;
  p.name_ = "tabulated";
  p.second_derivatives_ = periodic_spline_moments(values);
  p.values_ = std::move(values);
  return p;
}

double Profile::operator()(double u) const {
  const double w = wrap_unit(u);
  constexpr double two_pi = 2.0 * std::numbers::pi;
  if (name_ == "constant") return p0_;
  if (name_ == "cosine") return p0_ + p1_ * std::cos(two_pi * mode_ * (w - p2_));
  if (name_ == "logistic") {
    // Smooth plateau of the given half-width around the center: the logistic
    // is driven by cos of the torus distance so the result stays periodic.
    const double steepness = values_[0];
    const double drive = std::cos(two_pi * (w - p2_)) - std::cos(two_pi * p3_);
    return p0_ + p1_ / (1.0 + std::exp(-steepness * drive));
  }
  // Tabulated, periodic cubic spline on the uniform grid.
  const int n = static_cast<int>(values_.size());
  const double h = 1.0 / n;
  const double scaled = w * n;
  int i = static_cast<int>(scaled);
  if (i >= n) i = n - 1;
  const int j = (i + 1) % n;
  const double a = (i + 1) - scaled;
  const double b = scaled - i;
  return a * values_[i] + b * values_[j] +
         ((a * a * a - a) * second_derivatives_[i] +
          (b * b * b - b) * second_derivatives_[j]) *
             (h * h) / 6.0;
}

double Profile::grid_min(int samples) const {
  double lo = (*this)(0.0);
  for (int i = 1; i < samples; ++i) lo = std::min(lo, (*this)(double(i) / samples));
  return lo;
}

double Profile::grid_max(int samples) const {
  double hi = (*this)(0.0);
  for (int i = 1; i < samples; ++i) hi = std::max(hi, (*this)(double(i) / samples));
  return hi;
}

nlohmann::json Profile::to_json() const {
  nlohmann::json j;
  j["name"] = name_;
  if (name_ == "constant") {
    j["value"] = p0_;
  } else if (name_ == "cosine") {
    j["mean"] = p0_;
    j["amp"] = p1_;
    j["mode"] = mode_;
    j["phase"] = p2_;
  } else if (name_ == "logistic") {
    j["base"] = p0_;
    j["height"] = p1_;
    j["center"] = p2_;
    j["half_width"] = p3_;
    j["steepness"] = values_[0];
  } else {
    j["values"] = values_;
  }
  return j;
}

Profile Profile::from_json(const nlohmann::json& spec) {
  if (!spec.is_object() || !spec.contains("name")) {
    throw std::invalid_argument("profile spec must be an object with a \"name\"");
  }
  const std::string name = spec.at("name").get<std::string>();
  auto get_or = [&](const char* key, double fallback) {
    return spec.contains(key) ? spec.at(key).get<double>() : fallback;
  };
  if (name == "constant") return constant(spec.at("value").get<double>());
  if (name == "cosine") {
    const int mode = spec.contains("mode") ? spec.at("mode").get<int>() : 1;
    return cosine(spec.at("mean").get<double>(), spec.at("amp").get<double>(), mode,
                  get_or("phase", 0.0));
  }
  if (name == "logistic") {
    return logistic_bump(get_or("base", 0.0), spec.at("height").get<double>(),
                         get_or("center", 0.5), spec.at("half_width").get<double>(),
                         get_or("steepness", 10.0));
  }
  if (name == "tabulated") {
    return tabulated(spec.at("values").get<std::vector<double>>());
  }
  throw std::invalid_argument("unknown profile family \"" + name +
                              "\" (expected constant|cosine|logistic|tabulated)");
}

}  // namespace particle_limits
