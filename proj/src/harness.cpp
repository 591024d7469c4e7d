#include "particle_limits/harness.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include "particle_limits/parallel.hpp"
#include "particle_limits/rng.hpp"
#include "particle_limits/ssep.hpp"

namespace particle_limits {

double EllRule::operator()(double n) const {
  double value = 1.0;
  switch (family) {
    case Family::constant:
      value = parameter;
      break;
    case Family::power:
      value = std::pow(n, parameter);
      break;
    case Family::poly_log:
      value = std::pow(std::log(n), parameter);
      break;
  }
  return std::max(1.0, value);
}

std::string EllRule::name() const {
  switch (family) {
    case Family::constant:
      return "constant " + std::to_string(parameter);
    case Family::power:
      return "n^" + std::to_string(parameter);
    case Family::poly_log:
      return "(log n)^" + std::to_string(parameter);
  }
  return "";
}

EllRule EllRule::constant(double value) {
  if (value < 1.0) throw std::invalid_argument("constant ell rule needs value >= 1");
  return EllRule{Family::constant, value};
}

EllRule EllRule::power(double alpha) {
  if (alpha <= 0.0) throw std::invalid_argument("power ell rule needs alpha > 0");
  return EllRule{Family::power, alpha};
}

EllRule EllRule::poly_log(double beta) {
  if (beta <= 0.0) throw std::invalid_argument("poly-log ell rule needs beta > 0");
  return EllRule{Family::poly_log, beta};
}

nlohmann::json EllRule::to_json() const {
  switch (family) {
    case Family::constant:
      return {{"family", "constant"}, {"value", parameter}};
    case Family::power:
      return {{"family", "power"}, {"alpha", parameter}};
    case Family::poly_log:
      return {{"family", "poly_log"}, {"beta", parameter}};
  }
  return {};
}

EllRule EllRule::from_json(const nlohmann::json& spec) {
  const std::string family = spec.at("family").get<std::string>();
  if (family == "constant") return constant(spec.at("value").get<double>());
  if (family == "power") return power(spec.at("alpha").get<double>());
  if (family == "poly_log") return poly_log(spec.at("beta").get<double>());
  throw std::invalid_argument("unknown ell rule family \"" + family +
                              "\" (expected constant|power|poly_log)");
}

std::vector<std::pair<int, double>> ScalingSchedule::levels() const {
  std::vector<std::pair<int, double>> out;
  out.reserve(sizes.size());
  for (const int n : sizes) out.emplace_back(n, ell_rule(double(n)));
  return out;
}

void ScalingSchedule::validate() const {
  if (sizes.empty()) throw std::invalid_argument("schedule needs at least one size");
  int previous = 1;
  for (const int n : sizes) {
    if (n < 2) throw std::invalid_argument("schedule sizes must be >= 2");
    if (n <= previous) throw std::invalid_argument("schedule sizes must be strictly increasing");
    previous = n;
  }
}

nlohmann::json ScalingSchedule::to_json() const {
  return {{"sizes", sizes}, {"ell_rule", ell_rule.to_json()}};
}

ScalingSchedule ScalingSchedule::from_json(const nlohmann::json& spec) {
  ScalingSchedule s;
  s.sizes = spec.at("sizes").get<std::vector<int>>();
  s.ell_rule = EllRule::from_json(spec.at("ell_rule"));
  s.validate();
  return s;
}

A2Report check_a2(const EllRule& rule, const std::vector<double>& c_grid, double n_max) {
  if (c_grid.empty()) throw std::invalid_argument("a2 check needs a nonempty c grid");
  for (const double c : c_grid) {
    if (!(c > 0.0)) throw std::invalid_argument("a2 check needs c > 0");
  }
  if (n_max < 64.0) throw std::invalid_argument("a2 check needs n_max >= 64");

  A2Report report;
  report.rule = rule;
  report.n_max = n_max;
  report.overall_convergent = true;

  const int points = 65;
  std::vector<double> log_n(points);
  for (int i = 0; i < points; ++i) {
    log_n[i] = std::log(8.0) + (std::log(n_max) - std::log(8.0)) * double(i) / (points - 1);
  }

  for (const double c : c_grid) {
    A2TermReport term;
    term.c = c;

    // Local polynomial exponent of a_n = n^3 exp(-c ell(n)) between probes.
    std::vector<double> q(points - 1);
    for (int i = 0; i + 1 < points; ++i) {
      const double n0 = std::exp(log_n[i]);
      const double n1 = std::exp(log_n[i + 1]);
      const double log_a0 = 3.0 * log_n[i] - c * rule(n0);
      const double log_a1 = 3.0 * log_n[i + 1] - c * rule(n1);
      q[i] = -(log_a1 - log_a0) / (log_n[i + 1] - log_n[i]);
    }
    const int tail = 16;
    double tail_min = q[points - 2], tail_max = q[points - 2];
    for (int i = points - 1 - tail; i + 1 < points; ++i) {
      tail_min = std::min(tail_min, q[i]);
      tail_max = std::max(tail_max, q[i]);
    }
    term.final_local_exponent = q[points - 2];
    term.numeric_convergent = tail_min > 1.1;
    term.numeric_conclusive = term.numeric_convergent || tail_max < 0.9;

    // The named families have closed-form classifications, which override
    // the probe: a finite scan cannot see past its n_max.
    term.basis = "symbolic";
    switch (rule.family) {
      case EllRule::Family::constant:
        term.convergent = false;
        break;
      case EllRule::Family::power:
        term.convergent = true;
        break;
      case EllRule::Family::poly_log:
        if (rule.parameter > 1.0) {
          term.convergent = true;
        } else if (rule.parameter == 1.0) {
          term.convergent = c > 4.0;  // terms are n^(3-c)
        } else {
          term.convergent = false;
        }
        break;
    }
    report.overall_convergent = report.overall_convergent && term.convergent;
    report.per_c.push_back(term);
  }
  return report;
}

ErrorStats summarize_errors(std::vector<double> errors) {
  ErrorStats stats;
  stats.count = static_cast<int>(errors.size());
  if (errors.empty()) return stats;
  std::sort(errors.begin(), errors.end());
  auto quantile = [&](double p) {
    const double rank = p * (errors.size() - 1);
    const std::size_t lo = static_cast<std::size_t>(rank);
    const std::size_t hi = std::min(lo + 1, errors.size() - 1);
    const double frac = rank - double(lo);
    return errors[lo] * (1.0 - frac) + errors[hi] * frac;
  };
  stats.median = quantile(0.5);
  stats.q1 = quantile(0.25);
  stats.q3 = quantile(0.75);
  stats.max = errors.back();
  return stats;
}

namespace {

void fit_decay_slope(ConvergenceReport& report) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int points = 0;
  for (const auto& level : report.levels) {
    if (level.overall.count == 0 || level.overall.median <= 0.0) continue;
    const double x = std::log(double(level.n));
    const double y = std::log(level.overall.median);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++points;
  }
  if (points < 2) return;
  const double denom = points * sxx - sx * sx;
  if (denom <= 0.0) return;
  report.fitted_slope = (points * sxy - sx * sy) / denom;
  const double intercept = (sy - report.fitted_slope * sx) / points;
  double residual = 0.0;
  for (const auto& level : report.levels) {
    if (level.overall.count == 0 || level.overall.median <= 0.0) continue;
    const double predicted = intercept + report.fitted_slope * std::log(double(level.n));
    residual = std::max(residual, std::abs(std::log(level.overall.median) - predicted));
  }
  report.slope_residual = residual;
}

std::vector<std::function<double(double)>> fourier_test_functions(int modes) {
  std::vector<std::function<double(double)>> tests;
  tests.emplace_back([](double) { return 1.0; });
  constexpr double two_pi = 2.0 * std::numbers::pi;
  for (int k = 1; k <= modes; ++k) {
    tests.emplace_back([k, two_pi](double u) { return std::cos(two_pi * k * u); });
    tests.emplace_back([k, two_pi](double u) { return std::sin(two_pi * k * u); });
  }
  return tests;
}

struct ReplicaOutcome {
  bool ok = false;
  bool exploded = false;
  bool budget_exhausted = false;
  std::uint64_t events = 0;
  double overall_error = 0.0;
  std::vector<double> per_checkpoint_error;
  double tau_estimate = 0.0;
};

}  // namespace

nlohmann::json HydrodynamicStudyConfig::to_json() const {
  nlohmann::json grid_json{{"m", grid.m}};
  if (grid.fixed_dt) grid_json["dt"] = *grid.fixed_dt;
  return {{"study", "hydrodynamic"},
          {"profile", profile.to_json()},
          {"sizes", sizes},
          {"horizon", horizon},
          {"checkpoints", checkpoints},
          {"replicas", replicas},
          {"test_modes", test_modes},
          {"seed", master_seed},
          {"grid", grid_json},
          {"threads", threads}};
}

ConvergenceReport hydrodynamic_study(const HydrodynamicStudyConfig& config) {
  if (config.replicas < 1) throw std::invalid_argument("study needs replicas >= 1");
  if (config.test_modes < 0) throw std::invalid_argument("test_modes must be >= 0");
  ScalingSchedule schedule{config.sizes, EllRule::constant(1.0)};
  schedule.validate();
  if (config.profile.grid_min() < 0.0 || config.profile.grid_max() > 1.0) {
    throw std::invalid_argument("hydrodynamic profile must map into [0,1]");
  }

  const auto tests = fourier_test_functions(config.test_modes);
  const auto heat =
      solve_heat(config.profile, config.horizon, config.grid, config.checkpoints);

  // Reference integrals of each test function against rho(t_k, .).
  std::vector<std::vector<double>> reference(config.checkpoints.size(),
                                             std::vector<double>(tests.size(), 0.0));
  for (std::size_t k = 0; k < config.checkpoints.size(); ++k) {
    const auto& slice = heat.at_time(config.checkpoints[k]);
    for (std::size_t j = 0; j < tests.size(); ++j) {
      double acc = 0.0;
      for (int i = 0; i < config.grid.m; ++i) {
        acc += tests[j](double(i) / config.grid.m) * slice[i];
      }
      reference[k][j] = acc / config.grid.m;
    }
  }

  ConvergenceReport report;
  report.study = "hydrodynamic";
  report.config_echo = config.to_json();

  for (std::size_t level_index = 0; level_index < config.sizes.size(); ++level_index) {
    const int n = config.sizes[level_index];
    const auto base = static_cast<std::uint32_t>(level_index) *
                      static_cast<std::uint32_t>(config.replicas);
    std::vector<ReplicaOutcome> outcomes(config.replicas);

    parallel_for_replicas(config.replicas, config.threads, [&](int r) {
      auto& slot = outcomes[r];
      try {
        const auto replica_id = base + static_cast<std::uint32_t>(r);
        RngStream init_stream(config.master_seed, replica_id,
                              RngStream::Channel::initial_condition);
        const auto start = sample_initial_exclusion(n, config.profile, init_stream);
        SsepParams params{n, config.horizon, config.checkpoints};
        RngStream dynamics(config.master_seed, replica_id, RngStream::Channel::dynamics);
        const auto trajectory = ssep_run(start, params, dynamics);
        slot.events = trajectory.event_count;
        slot.per_checkpoint_error.resize(config.checkpoints.size(), 0.0);
        for (std::size_t k = 0; k < config.checkpoints.size(); ++k) {
          const auto measure = empirical_measure(trajectory.snapshots[k].config);
          double worst = 0.0;
          for (std::size_t j = 0; j < tests.size(); ++j) {
            worst = std::max(worst,
                             std::abs(measure.integrate(tests[j]) - reference[k][j]));
          }
          slot.per_checkpoint_error[k] = worst;
          slot.overall_error = std::max(slot.overall_error, worst);
        }
        slot.ok = true;
      } catch (const std::exception&) {
        slot.ok = false;
      }
    });

    LevelReport level;
    level.n = n;
    level.ell = 1.0;
    level.replicas_requested = config.replicas;
    std::vector<double> overall_errors;
    for (std::size_t k = 0; k < config.checkpoints.size(); ++k) {
      level.per_checkpoint.push_back({config.checkpoints[k], {}});
    }
    std::vector<std::vector<double>> per_checkpoint(config.checkpoints.size());
    for (const auto& slot : outcomes) {
      if (!slot.ok) {
        ++level.failed;
        continue;
      }
      ++level.replicas_used;
      level.total_events += slot.events;
      overall_errors.push_back(slot.overall_error);
      for (std::size_t k = 0; k < config.checkpoints.size(); ++k) {
        per_checkpoint[k].push_back(slot.per_checkpoint_error[k]);
      }
    }
    level.overall = summarize_errors(std::move(overall_errors));
    for (std::size_t k = 0; k < config.checkpoints.size(); ++k) {
      level.per_checkpoint[k].stats = summarize_errors(std::move(per_checkpoint[k]));
    }
    report.levels.push_back(std::move(level));
  }

  fit_decay_slope(report);
  return report;
}

nlohmann::json HighDensityStudyConfig::to_json() const {
  nlohmann::json grid_json{{"m", grid.m}};
  if (grid.fixed_dt) grid_json["dt"] = *grid.fixed_dt;
  return {{"study", "high_density"},
          {"profile", profile.to_json()},
          {"rates", rates.to_json()},
          {"schedule", schedule.to_json()},
          {"horizon", horizon},
          {"checkpoints", checkpoints},
          {"replicas", replicas},
          {"seed", master_seed},
          {"grid", grid_json},
          {"cap_scale", cap_scale},
          {"event_budget", event_budget},
          {"threads", threads}};
}

ConvergenceReport high_density_study(const HighDensityStudyConfig& config) {
  if (config.replicas < 1) throw std::invalid_argument("study needs replicas >= 1");
  config.schedule.validate();
  config.rates.validate();
  if (config.profile.grid_min() < 0.0) {
    throw std::invalid_argument("high-density profile must be nonnegative");
  }

  const auto pde = solve_reaction_diffusion(config.profile, config.rates, config.horizon,
                                            config.grid, config.checkpoints);
  if (pde.status != PdeStatus::resolved) {
    throw std::invalid_argument(
        "reaction-diffusion reference did not resolve on [0, horizon]; "
        "pick horizon below the blow-up time");
  }
  std::vector<DensityField> reference;
  reference.reserve(config.checkpoints.size());
  for (const double t : config.checkpoints) {
    reference.push_back(grid_field(pde.at_time(t)));
  }

  ConvergenceReport report;
  report.study = "high_density";
  report.config_echo = config.to_json();

  // All (level, replica) pairs run on one pool: the big-n replicas dominate
  // the work, and a flat task list keeps every worker busy to the end.
  const auto levels = config.schedule.levels();
  const int per_level = config.replicas;
  const int total_tasks = static_cast<int>(levels.size()) * per_level;
  std::vector<ReplicaOutcome> outcomes(total_tasks);

  parallel_for_replicas(total_tasks, config.threads, [&](int task) {
    auto& slot = outcomes[task];
    const auto [n, ell] = levels[static_cast<std::size_t>(task / per_level)];
    try {
      const auto replica_id = static_cast<std::uint32_t>(task);
      RngStream init_stream(config.master_seed, replica_id,
                            RngStream::Channel::initial_condition);
      const auto start = sample_initial_density(n, ell, config.profile, init_stream);
      BdrwParams params;
      params.n = n;
      params.ell = ell;
      params.horizon = config.horizon;
      params.checkpoints = config.checkpoints;
      params.cap = config.cap_scale * ell;
      params.event_budget = config.event_budget;
      RngStream dynamics(config.master_seed, replica_id, RngStream::Channel::dynamics);
      const auto outcome = bdrw_run(start, config.rates, params, dynamics);
      slot.events = outcome.trajectory.event_count;
      if (outcome.status == RunStatus::exploded) {
        slot.exploded = true;
        return;
      }
      if (outcome.status == RunStatus::budget_exhausted) {
        slot.budget_exhausted = true;
        return;
      }
      slot.per_checkpoint_error.resize(config.checkpoints.size(), 0.0);
      for (std::size_t k = 0; k < config.checkpoints.size(); ++k) {
        const auto field = density_field(outcome.trajectory.snapshots[k].config, ell);
        const double err = sup_norm_distance(field, reference[k]);
        slot.per_checkpoint_error[k] = err;
        slot.overall_error = std::max(slot.overall_error, err);
      }
      slot.ok = true;
    } catch (const std::exception&) {
      slot.ok = false;
    }
  });

  for (std::size_t level_index = 0; level_index < levels.size(); ++level_index) {
    const auto [n, ell] = levels[level_index];
    LevelReport level;
    level.n = n;
    level.ell = ell;
    level.replicas_requested = per_level;
    std::vector<double> overall_errors;
    std::vector<std::vector<double>> per_checkpoint(config.checkpoints.size());
    for (std::size_t k = 0; k < config.checkpoints.size(); ++k) {
      level.per_checkpoint.push_back({config.checkpoints[k], {}});
    }
    for (int r = 0; r < per_level; ++r) {
      const auto& slot = outcomes[level_index * per_level + r];
      level.total_events += slot.events;
      if (slot.exploded) {
        ++level.exploded;
        continue;
      }
      if (slot.budget_exhausted) {
        ++level.budget_exhausted;
        continue;
      }
      if (!slot.ok) {
        ++level.failed;
        continue;
      }
      ++level.replicas_used;
      overall_errors.push_back(slot.overall_error);
      for (std::size_t k = 0; k < config.checkpoints.size(); ++k) {
        per_checkpoint[k].push_back(slot.per_checkpoint_error[k]);
      }
    }
    level.overall = summarize_errors(std::move(overall_errors));
    for (std::size_t k = 0; k < config.checkpoints.size(); ++k) {
      level.per_checkpoint[k].stats = summarize_errors(std::move(per_checkpoint[k]));
    }
    report.levels.push_back(std::move(level));
  }

  fit_decay_slope(report);
  return report;
}

nlohmann::json BlowupStudyConfig::to_json() const {
  nlohmann::json grid_json{{"m", grid.m}};
  if (grid.fixed_dt) grid_json["dt"] = *grid.fixed_dt;
  return {{"study", "blowup"},
          {"profile", profile.to_json()},
          {"rates", rates.to_json()},
          {"schedule", schedule.to_json()},
          {"replicas", replicas},
          {"seed", master_seed},
          {"grid", grid_json},
          {"cap_scale", cap_scale},
          {"horizon", horizon},
          {"event_budget", event_budget},
          {"threads", threads},
          {"criterion_tail_start", criterion_tail_start},
          {"criterion_s_max", criterion_s_max}};
}

BlowupComparison blowup_study(const BlowupStudyConfig& config) {
  if (config.replicas < 1) throw std::invalid_argument("study needs replicas >= 1");
  config.schedule.validate();
  config.rates.validate();

  BlowupComparison comparison;
  comparison.config_echo = config.to_json();

  const auto criterion = check_blowup_criterion(config.rates, config.criterion_tail_start,
                                                config.criterion_s_max);
  comparison.criterion_verdict = criterion.verdict;
  comparison.criterion_warning = criterion.verdict != CriterionVerdict::satisfied;

  const auto pde = solve_reaction_diffusion(config.profile, config.rates, config.horizon,
                                            config.grid, {});
  comparison.pde_status = pde.status;
  comparison.pde_blowup_estimate =
      pde.status == PdeStatus::blew_up ? pde.blowup_estimate : 0.0;

  const auto levels = config.schedule.levels();
  for (std::size_t level_index = 0; level_index < levels.size(); ++level_index) {
    const auto [n, ell] = levels[level_index];
    const auto base = static_cast<std::uint32_t>(level_index) *
                      static_cast<std::uint32_t>(config.replicas);
    std::vector<ReplicaOutcome> outcomes(config.replicas);

    parallel_for_replicas(config.replicas, config.threads, [&](int r) {
      auto& slot = outcomes[r];
      const auto replica_id = base + static_cast<std::uint32_t>(r);
      RngStream init_stream(config.master_seed, replica_id,
                            RngStream::Channel::initial_condition);
      const auto start = sample_initial_density(n, ell, config.profile, init_stream);
      BdrwParams params;
      params.n = n;
      params.ell = ell;
      params.horizon = config.horizon;
      params.cap = config.cap_scale * ell;
      params.event_budget = config.event_budget;
      RngStream dynamics(config.master_seed, replica_id, RngStream::Channel::dynamics);
      const auto outcome = bdrw_run(start, config.rates, params, dynamics);
      slot.events = outcome.trajectory.event_count;
      if (outcome.status == RunStatus::exploded) {
        slot.exploded = true;
        slot.tau_estimate = outcome.tau_estimate.value_or(outcome.final_time);
      } else if (outcome.status == RunStatus::budget_exhausted) {
        slot.budget_exhausted = true;
      } else {
        slot.ok = true;  // completed without exploding
      }
    });

    BlowupLevel level;
    level.n = n;
    level.ell = ell;
    level.replicas_requested = config.replicas;
    std::vector<double> taus;
    for (const auto& slot : outcomes) {
      level.total_events += slot.events;
      if (slot.exploded) {
        ++level.exploded;
        taus.push_back(slot.tau_estimate);
      } else if (slot.budget_exhausted) {
        ++level.budget_exhausted;
      } else {
        ++level.completed;
      }
    }
    level.tau = summarize_errors(std::move(taus));
    if (level.exploded > 0 && comparison.pde_blowup_estimate > 0.0) {
      level.relative_offset = (level.tau.median - comparison.pde_blowup_estimate) /
                              comparison.pde_blowup_estimate;
    }
    comparison.levels.push_back(std::move(level));
  }
  return comparison;
}

}  // namespace particle_limits
