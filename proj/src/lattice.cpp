#include "particle_limits/lattice.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace particle_limits {

namespace {

void require_sites(int n) {
  if (n < 2) throw std::invalid_argument("torus needs at least 2 sites");
}

double wrap_unit(double u) {
  double w = u - std::floor(u);
  if (w >= 1.0) w = 0.0;
  return w;
}

}  // namespace

std::int64_t Configuration::total_particles() const {
  return std::accumulate(occupations.begin(), occupations.end(), std::int64_t{0});
}

std::int64_t Configuration::max_occupation() const {
  if (occupations.empty()) return 0;
  return *std::max_element(occupations.begin(), occupations.end());
}

void Configuration::validate() const {
  if (static_cast<int>(occupations.size()) != n) {
    throw std::invalid_argument("configuration has " +
                                std::to_string(occupations.size()) +
                                " occupations for " + std::to_string(n) + " sites");
  }
  for (int x = 0; x < n; ++x) {
    const std::int64_t eta = occupations[x];
    if (kind == OccupationKind::exclusion && (eta < 0 || eta > 1)) {
      throw std::invalid_argument("exclusion occupation outside {0,1} at site " +
                                  std::to_string(x));
    }
    if (eta < 0) {
      throw std::invalid_argument("negative occupation at site " + std::to_string(x));
    }
  }
}

double EmpiricalMeasure::mass() const {
  return std::accumulate(weights.begin(), weights.end(), 0.0);
}

double EmpiricalMeasure::integrate(const std::function<double(double)>& test) const {
  double acc = 0.0;
  for (int x = 0; x < n; ++x) acc += weights[x] * test(double(x) / n);
  return acc;
}

std::vector<std::pair<double, double>> EmpiricalMeasure::atoms() const {
  std::vector<std::pair<double, double>> out;
  out.reserve(weights.size());
  for (int x = 0; x < n; ++x) out.emplace_back(double(x) / n, weights[x]);
  return out;
}

double DensityField::operator()(double u) const {
  const double scaled = wrap_unit(u) * n;
  int x = static_cast<int>(scaled);
  if (x >= n) x = n - 1;
  const int next = x + 1 == n ? 0 : x + 1;
  // (Nu - x) X(u_{x+1}) + (x + 1 - Nu) X(u_x), wrapping at the seam.
  const double t = scaled - x;
  return t * values[next] + (1.0 - t) * values[x];
}

Configuration sample_initial_exclusion(int n, const Profile& phi, RngStream& stream) {
  require_sites(n);
  Configuration c;
  c.n = n;
  c.kind = OccupationKind::exclusion;
  c.occupations.resize(n);
  for (int x = 0; x < n; ++x) {
    const double p = phi(double(x) / n);
    if (p < 0.0 || p > 1.0) {
      throw std::invalid_argument("exclusion profile must lie in [0,1]; got " +
                                  std::to_string(p) + " at u=" +
                                  std::to_string(double(x) / n));
    }
    c.occupations[x] = stream.bernoulli(p) ? 1 : 0;
  }
  return c;
}

Configuration sample_initial_density(int n, double ell, const Profile& phi,
                                     RngStream& stream) {
  require_sites(n);
  if (ell < 1.0) throw std::invalid_argument("density parameter ell must be >= 1");
  Configuration c;
  c.n = n;
  c.kind = OccupationKind::unbounded;
  c.occupations.resize(n);
  for (int x = 0; x < n; ++x) {
    const double value = phi(double(x) / n);
    if (value < 0.0) {
      throw std::invalid_argument("density profile must be nonnegative; got " +
                                  std::to_string(value) + " at u=" +
                                  std::to_string(double(x) / n));
    }
    c.occupations[x] = stream.poisson(ell * value);
  }
  return c;
}

EmpiricalMeasure empirical_measure(const Configuration& c) {
  EmpiricalMeasure m;
  m.n = c.n;
  m.weights.resize(c.occupations.size());
  for (std::size_t x = 0; x < c.occupations.size(); ++x) {
    m.weights[x] = static_cast<double>(c.occupations[x]) / c.n;
  }
  return m;
}

DensityField density_field(const Configuration& c, double ell) {
  if (ell < 1.0) throw std::invalid_argument("density parameter ell must be >= 1");
  DensityField f;
  f.n = c.n;
  f.ell = ell;
  f.values.resize(c.occupations.size());
  for (std::size_t x = 0; x < c.occupations.size(); ++x) {
    f.values[x] = static_cast<double>(c.occupations[x]) / ell;
  }
  return f;
}

DensityField grid_field(std::vector<double> values) {
  DensityField f;
  f.n = static_cast<int>(values.size());
  f.ell = 1.0;
  f.values = std::move(values);
  return f;
}

namespace {

/// Union of both breakpoint grids, each gap split into 4.
template <typename Other>
double sup_norm_on_refined_grid(const DensityField& a, const Other& b,
                                const std::vector<double>& breakpoints) {
  double best = 0.0;
  const std::size_t count = breakpoints.size();
  for (std::size_t i = 0; i < count; ++i) {
    const double lo = breakpoints[i];
    const double hi = i + 1 < count ? breakpoints[i + 1] : 1.0;
    const double step = (hi - lo) / 4.0;
    for (int k = 0; k < 4; ++k) {
      const double u = lo + k * step;
      best = std::max(best, std::abs(a(u) - b(u)));
    }
  }
  return best;
}

std::vector<double> merged_breakpoints(int na, int nb) {
  std::vector<double> pts;
  pts.reserve(static_cast<std::size_t>(na) + nb);
  for (int x = 0; x < na; ++x) pts.push_back(double(x) / na);
  for (int x = 0; x < nb; ++x) pts.push_back(double(x) / nb);
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  return pts;
}

}  // namespace

double sup_norm_distance(const DensityField& a, const DensityField& b) {
  return sup_norm_on_refined_grid(a, b, merged_breakpoints(a.n, b.n));
}

double sup_norm_distance(const DensityField& a, const Profile& b) {
  std::vector<double> pts;
  pts.reserve(a.n);
  for (int x = 0; x < a.n; ++x) pts.push_back(double(x) / a.n);
  return sup_norm_on_refined_grid(a, b, pts);
}

}  // namespace particle_limits
