#include "particle_limits/pde.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>

namespace particle_limits {

void PdeGrid::validate() const {
  if (m < 8) throw std::invalid_argument("pde grid needs at least 8 points");
  if (fixed_dt) {
    if (*fixed_dt <= 0.0) throw std::invalid_argument("fixed dt must be positive");
    if (*fixed_dt > cfl_dt() * (1.0 + 1e-12)) {
      throw std::invalid_argument("fixed dt " + std::to_string(*fixed_dt) +
                                  " violates the diffusive CFL bound " +
                                  std::to_string(cfl_dt()));
    }
  }
  if (norm_ceiling <= 0.0) throw std::invalid_argument("norm ceiling must be positive");
  if (dt_floor <= 0.0) throw std::invalid_argument("dt floor must be positive");
}

const std::vector<double>& PdeSolution::at_time(double t, double tol) const {
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (std::abs(times[i] - t) <= tol) return values[i];
  }
  throw std::out_of_range("no stored slice at time " + std::to_string(t));
}

namespace {

double sup_norm(const std::vector<double>& v) {
  double best = 0.0;
  for (const double x : v) best = std::max(best, std::abs(x));
  return best;
}

/// Largest |f'| over the current values, by centered differences; supports
/// tabulated rate functions uniformly.
double max_reaction_stiffness(const RateFunctions& rates, const std::vector<double>& rho) {
  double best = 0.0;
  for (const double value : rho) {
    const double s = std::max(value, 0.0);
    const double delta = std::max(1e-6, 1e-6 * std::abs(s));
    const double hi = rates.reaction(s + delta);
    const double lo = rates.reaction(std::max(s - delta, 0.0));
    const double width = s - delta >= 0.0 ? 2.0 * delta : s + delta;
    if (width > 0.0) best = std::max(best, std::abs(hi - lo) / width);
  }
  return best;
}

struct NormSample {
  double time;
  double norm;
};

/// Blow-up time from the norm history: fit the growth exponent p over the
/// last decade of norm samples, then extrapolate norm^(1-p) linearly to zero.
/// Falls back to the reciprocal-norm fit (p = 2) when the exponent fit is
/// unstable.
double extrapolate_blowup_time(const std::vector<NormSample>& samples) {
  if (samples.empty()) return 0.0;
  const double last_time = samples.back().time;
  const double last_norm = samples.back().norm;
  std::size_t first = samples.size();
  while (first > 0 && samples[first - 1].norm >= last_norm / 10.0) --first;
  const std::size_t count = samples.size() - first;

  double p_hat = 2.0;
  bool fitted = false;
  if (count >= 4) {
    // Least squares of log(growth rate) on log(norm) between samples.
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int pairs = 0;
    for (std::size_t i = first; i + 1 < samples.size(); ++i) {
      const double dt = samples[i + 1].time - samples[i].time;
      const double dn = samples[i + 1].norm - samples[i].norm;
      if (dt <= 0.0 || dn <= 0.0) continue;
      const double x = 0.5 * (std::log(samples[i].norm) + std::log(samples[i + 1].norm));
      const double y = std::log(dn / dt);
      sx += x;
      sy += y;
      sxx += x * x;
      sxy += x * y;
      ++pairs;
    }
    if (pairs >= 3) {
      const double denom = pairs * sxx - sx * sx;
      if (denom > 0.0) {
        const double slope = (pairs * sxy - sx * sy) / denom;
        if (slope > 1.05 && slope < 12.0) {
          p_hat = slope;
          fitted = true;
        }
      }
    }
  }

  for (int attempt = 0; attempt < 2; ++attempt) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int points = 0;
    for (std::size_t i = first; i < samples.size(); ++i) {
      const double x = samples[i].time;
      const double y = std::pow(samples[i].norm, 1.0 - p_hat);
      sx += x;
      sy += y;
      sxx += x * x;
      sxy += x * y;
      ++points;
    }
    if (points >= 2) {
      const double denom = points * sxx - sx * sx;
      if (denom > 0.0) {
        const double slope = (points * sxy - sx * sy) / denom;
        const double intercept = (sy - slope * sx) / points;
        if (slope < 0.0) {
          const double root = -intercept / slope;
          if (root >= last_time) return root;
        }
      }
    }
    if (!fitted) break;  // reciprocal fallback already ran
    p_hat = 2.0;
    fitted = false;
  }
  return last_time;
}

PdeSolution integrate(const Profile& phi, const RateFunctions& rates, double horizon,
                      const PdeGrid& grid, const std::vector<double>& checkpoints) {
  grid.validate();
  if (horizon < 0.0) throw std::invalid_argument("horizon must be nonnegative");
  for (std::size_t i = 0; i < checkpoints.size(); ++i) {
    if (checkpoints[i] < 0.0 || checkpoints[i] > horizon ||
        (i > 0 && checkpoints[i] < checkpoints[i - 1])) {
      throw std::invalid_argument("pde checkpoints must be sorted within [0, horizon]");
    }
  }

  const int m = grid.m;
  const double h = grid.spacing();
  const double inv_h2 = 1.0 / (h * h);
  const bool zero_reaction = rates.birth.is_zero() && rates.death.is_zero();

  std::vector<double> rho(m);
  for (int i = 0; i < m; ++i) rho[i] = phi(double(i) / m);

  PdeSolution out;
  out.m = m;

  auto derivative = [&](const std::vector<double>& u, std::vector<double>& du) {
    du[0] = (u[m - 1] - 2.0 * u[0] + u[1]) * inv_h2;
    for (int i = 1; i < m - 1; ++i) du[i] = (u[i - 1] - 2.0 * u[i] + u[i + 1]) * inv_h2;
    du[m - 1] = (u[m - 2] - 2.0 * u[m - 1] + u[0]) * inv_h2;
    if (!zero_reaction) {
      for (int i = 0; i < m; ++i) du[i] += rates.reaction(u[i]);
    }
  };

  std::vector<double> k1(m), k2(m), k3(m), k4(m), stage(m);
  auto rk4_step = [&](double dt) {
    derivative(rho, k1);
    for (int i = 0; i < m; ++i) stage[i] = rho[i] + 0.5 * dt * k1[i];
    derivative(stage, k2);
    for (int i = 0; i < m; ++i) stage[i] = rho[i] + 0.5 * dt * k2[i];
    derivative(stage, k3);
    for (int i = 0; i < m; ++i) stage[i] = rho[i] + dt * k3[i];
    derivative(stage, k4);
    for (int i = 0; i < m; ++i) {
      rho[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
  };

  std::vector<NormSample> history;
  const double initial_norm = sup_norm(rho);
  double last_kept_norm = 0.0;
  auto maybe_keep_sample = [&](double t, double norm) {
    // Thin to ~8 samples per octave of norm growth.
    if (history.empty() || norm >= last_kept_norm * 1.0905) {
      history.push_back({t, norm});
      last_kept_norm = norm;
    }
  };
  maybe_keep_sample(0.0, initial_norm);

  double t = 0.0;
  std::size_t next_checkpoint = 0;
  auto record_due_checkpoints = [&](double now) {
    while (next_checkpoint < checkpoints.size() &&
           checkpoints[next_checkpoint] <= now + 1e-15 * std::max(1.0, now)) {
      out.times.push_back(checkpoints[next_checkpoint]);
      out.values.push_back(rho);
      ++next_checkpoint;
    }
  };
  record_due_checkpoints(0.0);

  while (t < horizon) {
    double dt_policy = grid.cfl_dt();
    if (grid.fixed_dt) {
      dt_policy = *grid.fixed_dt;
    } else if (!zero_reaction) {
      const double stiffness = max_reaction_stiffness(rates, rho);
      dt_policy = std::min(dt_policy, 0.5 / (1.0 + stiffness));
    }
    if (dt_policy < grid.dt_floor) {
      const double norm = sup_norm(rho);
      // Stiffness can outrun the floor before the ceiling (steep reactions);
      // treat it as a certified blow-up when the norm is far into a climb.
      if (!zero_reaction && norm >= 1e4 * std::max(1.0, initial_norm) &&
          history.size() >= 2 && history.back().norm > history.front().norm) {
        out.status = PdeStatus::blew_up;
        out.last_resolved_time = t;
        out.blowup_estimate = extrapolate_blowup_time(history);
        return out;
      }
      out.status = PdeStatus::step_underflow;
      out.last_resolved_time = t;
      return out;
    }

    double dt = std::min(dt_policy, horizon - t);
    if (next_checkpoint < checkpoints.size()) {
      const double to_checkpoint = checkpoints[next_checkpoint] - t;
      if (to_checkpoint > 0.0) dt = std::min(dt, to_checkpoint);
    }

    rk4_step(dt);
    t += dt;
    record_due_checkpoints(t);

    const double norm = sup_norm(rho);
    maybe_keep_sample(t, norm);
    if (norm >= grid.norm_ceiling) {
      out.status = PdeStatus::blew_up;
      out.last_resolved_time = t;
      out.blowup_estimate = extrapolate_blowup_time(history);
      return out;
    }
  }

  out.status = PdeStatus::resolved;
  out.last_resolved_time = horizon;
  return out;
}

}  // namespace

PdeSolution solve_heat(const Profile& phi, double horizon, const PdeGrid& grid,
                       const std::vector<double>& checkpoints) {
  return integrate(phi, RateFunctions{}, horizon, grid, checkpoints);
}

PdeSolution solve_reaction_diffusion(const Profile& phi, const RateFunctions& rates,
                                     double horizon, const PdeGrid& grid,
                                     const std::vector<double>& checkpoints) {
  rates.validate();
  return integrate(phi, rates, horizon, grid, checkpoints);
}

namespace {

/// Adaptive Simpson on [lo, hi] with bounded recursion depth.
double adaptive_simpson(const std::function<double(double)>& g, double lo, double hi,
                        double f_lo, double f_mid, double f_hi, double tol, int depth) {
  const double mid = 0.5 * (lo + hi);
  const double left_mid = 0.5 * (lo + mid);
  const double right_mid = 0.5 * (mid + hi);
  const double f_lm = g(left_mid);
  const double f_rm = g(right_mid);
  const double whole = (hi - lo) / 6.0 * (f_lo + 4.0 * f_mid + f_hi);
  const double left = (mid - lo) / 6.0 * (f_lo + 4.0 * f_lm + f_mid);
  const double right = (hi - mid) / 6.0 * (f_mid + 4.0 * f_rm + f_hi);
  if (depth <= 0 || std::abs(left + right - whole) <= 15.0 * tol) {
    return left + right + (left + right - whole) / 15.0;
  }
  return adaptive_simpson(g, lo, mid, f_lo, f_lm, f_mid, tol / 2.0, depth - 1) +
         adaptive_simpson(g, mid, hi, f_mid, f_rm, f_hi, tol / 2.0, depth - 1);
}

double integrate_reciprocal(const std::function<double(double)>& f, double lo, double hi) {
  // Work in log space above 1 so wide tails cost few evaluations.
  auto on_segment = [&](double a, double b, const std::function<double(double)>& g) {
    const double mid = 0.5 * (a + b);
    return adaptive_simpson(g, a, b, g(a), g(mid), g(b), 1e-12, 40);
  };
  double total = 0.0;
  const double split = std::min(hi, std::max(lo, 1.0));
  if (split > lo) {
    total += on_segment(lo, split, [&](double s) { return 1.0 / f(s); });
  }
  if (hi > split) {
    total += on_segment(std::log(split), std::log(hi),
                        [&](double x) { return std::exp(x) / f(std::exp(x)); });
  }
  return total;
}

}  // namespace

BlowupCriterionReport check_blowup_criterion(const RateFunctions& rates, double a,
                                             double s_max) {
  if (a < 0.0) throw std::invalid_argument("tail start must be nonnegative");
  if (s_max <= a) throw std::invalid_argument("s_max must exceed the tail start");
  rates.validate(s_max);

  BlowupCriterionReport report;
  report.tail_start = a;
  auto f = [&](double s) { return rates.reaction(s); };

  // Probe grid: log-spaced across [a, s_max] (shifted start when a == 0).
  const int probes = 257;
  const double lo = a > 0.0 ? a : s_max * 1e-9;
  std::vector<double> grid(probes);
  for (int i = 0; i < probes; ++i) {
    grid[i] = lo * std::pow(s_max / lo, double(i) / (probes - 1));
  }
  if (a == 0.0) grid.insert(grid.begin(), 0.0);

  report.positive_on_tail = true;
  for (const double s : grid) {
    if (!(f(s) > 0.0)) {
      report.positive_on_tail = false;
      break;
    }
  }

  report.convex_on_tail = true;
  for (std::size_t i = 1; i + 1 < grid.size(); ++i) {
    const double s0 = grid[i - 1], s1 = grid[i], s2 = grid[i + 1];
    const double left = (f(s1) - f(s0)) / (s1 - s0);
    const double right = (f(s2) - f(s1)) / (s2 - s1);
    const double scale = std::max({std::abs(f(s0)), std::abs(f(s2)), 1.0});
    if (right - left < -1e-8 * scale) {
      report.convex_on_tail = false;
      break;
    }
  }

  // Power-law fit of f over the top decade of the probe window.
  double q_hat = 0.0;
  double residual = std::numeric_limits<double>::infinity();
  if (report.positive_on_tail) {
    const int fit_points = 33;
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    std::vector<double> xs(fit_points), ys(fit_points);
    for (int i = 0; i < fit_points; ++i) {
      const double s = (s_max / 10.0) * std::pow(10.0, double(i) / (fit_points - 1));
      xs[i] = std::log(s);
      ys[i] = std::log(f(s));
      sx += xs[i];
      sy += ys[i];
      sxx += xs[i] * xs[i];
      sxy += xs[i] * ys[i];
    }
    const double denom = fit_points * sxx - sx * sx;
    q_hat = (fit_points * sxy - sx * sy) / denom;
    const double intercept = (sy - q_hat * sx) / fit_points;
    residual = 0.0;
    for (int i = 0; i < fit_points; ++i) {
      residual = std::max(residual, std::abs(ys[i] - (intercept + q_hat * xs[i])));
    }
  }
  report.fitted_tail_exponent = q_hat;
  // A fit this clean is an exact power law, so the exponent comparison is
  // trustworthy even inside the ambiguous band around 1.
  report.tail_fit_conclusive =
      report.positive_on_tail && (residual < 1e-6 || std::abs(q_hat - 1.0) > 0.05);

  report.integral_value = std::numeric_limits<double>::infinity();
  if (report.positive_on_tail && report.tail_fit_conclusive) {
    report.integral_finite = q_hat > 1.0;
    if (report.integral_finite) {
      const double quad = integrate_reciprocal(f, a, s_max);
      const double tail = s_max / ((q_hat - 1.0) * f(s_max));
      report.integral_value = quad + tail;
    }
  }

  if (!report.positive_on_tail || !report.convex_on_tail) {
    report.verdict = CriterionVerdict::not_satisfied;
  } else if (!report.tail_fit_conclusive) {
    report.verdict = CriterionVerdict::inconclusive;
  } else {
    report.verdict = report.integral_finite ? CriterionVerdict::satisfied
                                            : CriterionVerdict::not_satisfied;
  }
  return report;
}

}  // namespace particle_limits
