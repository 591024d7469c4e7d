#include <cmath>
#include <vector>

#include <doctest.h>

#include "particle_limits/harness.hpp"
#include "particle_limits/lattice.hpp"
#include "particle_limits/serialize.hpp"

using namespace particle_limits;

TEST_CASE("ell rules evaluate their families and stay >= 1") {
  CHECK(EllRule::constant(1.0)(1024.0) == 1.0);
  CHECK(EllRule::power(1.0)(64.0) == 64.0);
  CHECK(EllRule::power(0.5)(64.0) == doctest::Approx(8.0));
  CHECK(EllRule::poly_log(2.0)(64.0) == doctest::Approx(std::log(64.0) * std::log(64.0)));
  CHECK(EllRule::poly_log(2.0)(2.0) == 1.0);  // clamped
  CHECK_THROWS_AS(EllRule::power(0.0), std::invalid_argument);
  CHECK_THROWS_AS(EllRule::constant(0.5), std::invalid_argument);

  const auto rule = EllRule::poly_log(2.0);
  const auto round_trip = EllRule::from_json(rule.to_json());
  CHECK(round_trip.family == rule.family);
  CHECK(round_trip.parameter == rule.parameter);
}

TEST_CASE("schedule validation") {
  ScalingSchedule bad{{64, 64}, EllRule::power(1.0)};
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  ScalingSchedule good{{32, 64, 128}, EllRule::power(1.0)};
  good.validate();
  const auto levels = good.levels();
  REQUIRE(levels.size() == 3);
  CHECK(levels[1].second == 64.0);
}

TEST_CASE("a2 checker: linear, poly-log squared, and logarithmic ell rules") {
  const std::vector<double> c_grid{0.01, 0.1, 1.0, 4.0};

  const auto linear = check_a2(EllRule::power(1.0), c_grid, 1e6);
  CHECK(linear.overall_convergent);
  CHECK(linear.grid_relative_caveat);
  for (const auto& term : linear.per_c) CHECK(term.convergent);

  const auto squared_log = check_a2(EllRule::poly_log(2.0), c_grid, 1e6);
  CHECK(squared_log.overall_convergent);
  CHECK(squared_log.grid_relative_caveat);

  // ell = log n gives terms n^(3-c): divergent for every c <= 4.
  const auto plain_log = check_a2(EllRule::poly_log(1.0), c_grid, 1e6);
  CHECK(!plain_log.overall_convergent);
  for (const auto& term : plain_log.per_c) CHECK(!term.convergent);

  // With c = 6 the same rule gives a convergent n^-3 series.
  const auto convergent_log = check_a2(EllRule::poly_log(1.0), {6.0}, 1e6);
  CHECK(convergent_log.overall_convergent);
}

TEST_CASE("a2 checker: numeric probe agrees where the scan can see the decay") {
  const auto report = check_a2(EllRule::power(1.0), {1.0}, 1e6);
  REQUIRE(report.per_c.size() == 1);
  CHECK(report.per_c[0].numeric_convergent);
  CHECK(report.per_c[0].numeric_conclusive);
  CHECK(report.per_c[0].basis == "symbolic");

  // (log n)^2 at c = 0.01 only decays past astronomically large n; the probe
  // must not claim convergence even though the symbolic verdict does.
  const auto slow = check_a2(EllRule::poly_log(2.0), {0.01}, 1e6);
  REQUIRE(slow.per_c.size() == 1);
  CHECK(!slow.per_c[0].numeric_convergent);
  CHECK(slow.per_c[0].convergent);
}

TEST_CASE("a2 checker rejects bad inputs") {
  CHECK_THROWS_AS(check_a2(EllRule::power(1.0), {}, 1e6), std::invalid_argument);
  CHECK_THROWS_AS(check_a2(EllRule::power(1.0), {0.0}, 1e6), std::invalid_argument);
  CHECK_THROWS_AS(check_a2(EllRule::power(1.0), {1.0}, 8.0), std::invalid_argument);
}

TEST_CASE("error summary quartiles") {
  const auto stats = summarize_errors({4.0, 1.0, 3.0, 2.0, 5.0});
  CHECK(stats.count == 5);
  CHECK(stats.median == 3.0);
  CHECK(stats.q1 == 2.0);
  CHECK(stats.q3 == 4.0);
  CHECK(stats.max == 5.0);
  CHECK(summarize_errors({}).count == 0);
}

TEST_CASE("hydrodynamic study: degenerate profiles give zero error") {
  HydrodynamicStudyConfig config;
  config.sizes = {8, 16};
  config.horizon = 0.01;
  config.checkpoints = {0.005, 0.01};
  config.replicas = 5;
  config.master_seed = 7;
  config.grid.m = 64;

  config.profile = Profile::constant(0.0);
  const auto empty = hydrodynamic_study(config);
  for (const auto& level : empty.levels) CHECK(level.overall.max <= 1e-12);

  config.profile = Profile::constant(1.0);
  const auto full = hydrodynamic_study(config);
  for (const auto& level : full.levels) CHECK(level.overall.max <= 1e-12);
}

TEST_CASE("hydrodynamic study: fluctuation errors shrink with n") {
  HydrodynamicStudyConfig config;
  config.profile = Profile::cosine(0.5, 0.25);
  config.sizes = {16, 64, 256};
  config.horizon = 0.02;
  config.checkpoints = {0.01, 0.02};
  config.replicas = 60;
  config.test_modes = 2;
  config.master_seed = 11;
  config.grid.m = 128;
  const auto report = hydrodynamic_study(config);
  REQUIRE(report.levels.size() == 3);
  CHECK(report.levels[0].overall.median > report.levels[1].overall.median);
  CHECK(report.levels[1].overall.median > report.levels[2].overall.median);
  CHECK(report.fitted_slope < -0.25);
  for (const auto& level : report.levels) {
    CHECK(level.replicas_used == config.replicas);
    CHECK(level.per_checkpoint.size() == 2);
  }
}

TEST_CASE("hydrodynamic study requires an exclusion-compatible profile") {
  HydrodynamicStudyConfig config;
  config.profile = Profile::constant(1.5);
  CHECK_THROWS_AS(hydrodynamic_study(config), std::invalid_argument);
}

TEST_CASE("studies are reproducible bit for bit") {
  HydrodynamicStudyConfig config;
  config.profile = Profile::cosine(0.5, 0.25);
  config.sizes = {16, 32};
  config.horizon = 0.01;
  config.checkpoints = {0.01};
  config.replicas = 16;
  config.master_seed = 5;
  config.grid.m = 64;
  config.threads = 2;
  const auto a = hydrodynamic_study(config);
  const auto b = hydrodynamic_study(config);
  CHECK(convergence_report_to_json(a).dump() == convergence_report_to_json(b).dump());
}

TEST_CASE("high-density study: empty system gives zero error") {
  HighDensityStudyConfig config;
  config.profile = Profile::constant(0.0);
  config.rates = RateFunctions{RateFunction::linear(1.0), RateFunction::zero()};
  config.schedule = ScalingSchedule{{8, 16}, EllRule::power(1.0)};
  config.horizon = 0.1;
  config.checkpoints = {0.05, 0.1};
  config.replicas = 4;
  config.master_seed = 3;
  config.grid.m = 32;
  const auto report = high_density_study(config);
  for (const auto& level : report.levels) {
    CHECK(level.replicas_used == config.replicas);
    CHECK(level.overall.max <= 1e-12);
  }
}

TEST_CASE("high-density study: pure-walk noise shrinks along the schedule") {
  HighDensityStudyConfig config;
  config.profile = Profile::constant(1.0);
  config.rates = RateFunctions{};
  config.schedule = ScalingSchedule{{8, 32}, EllRule::power(1.0)};
  config.horizon = 0.05;
  config.checkpoints = {0.025, 0.05};
  config.replicas = 40;
  config.master_seed = 17;
  config.grid.m = 64;
  const auto report = high_density_study(config);
  REQUIRE(report.levels.size() == 2);
  CHECK(report.levels[0].overall.median > report.levels[1].overall.median);
}

TEST_CASE("high-density study refuses a horizon past the blow-up") {
  HighDensityStudyConfig config;
  config.profile = Profile::constant(1.0);
  config.rates = RateFunctions{RateFunction::power(1.0, 2.0), RateFunction::zero()};
  config.schedule = ScalingSchedule{{8, 16}, EllRule::power(1.0)};
  config.horizon = 2.0;  // rho' = rho^2 blows up at t = 1
  config.checkpoints = {1.0, 2.0};
  config.replicas = 2;
  CHECK_THROWS_AS(high_density_study(config), std::invalid_argument);
}

TEST_CASE("blow-up study compares particle explosions with the pde estimate") {
  BlowupStudyConfig config;
  config.profile = Profile::constant(1.0);
  config.rates = RateFunctions{RateFunction::power(1.0, 2.0), RateFunction::zero()};
  config.schedule = ScalingSchedule{{8}, EllRule::constant(50.0)};
  config.replicas = 12;
  config.master_seed = 23;
  config.grid.m = 32;
  config.cap_scale = 1000.0;
  config.horizon = 16.0;
  const auto comparison = blowup_study(config);
  CHECK(comparison.criterion_verdict == CriterionVerdict::satisfied);
  CHECK(!comparison.criterion_warning);
  CHECK(comparison.pde_status == PdeStatus::blew_up);
  CHECK(std::abs(comparison.pde_blowup_estimate - 1.0) <= 0.01);
  REQUIRE(comparison.levels.size() == 1);
  CHECK(comparison.levels[0].exploded == config.replicas);
  CHECK(std::abs(comparison.levels[0].tau.median - 1.0) < 0.25);
  CHECK(std::abs(comparison.levels[0].relative_offset) < 0.25);
}

TEST_CASE("blow-up study: death-only dynamics never explode") {
  BlowupStudyConfig config;
  config.profile = Profile::constant(1.0);
  config.rates = RateFunctions{RateFunction::zero(), RateFunction::linear(1.0)};
  config.schedule = ScalingSchedule{{8}, EllRule::constant(20.0)};
  config.replicas = 6;
  config.master_seed = 29;
  config.grid.m = 32;
  config.horizon = 2.0;
  const auto comparison = blowup_study(config);
  CHECK(comparison.criterion_warning);  // criterion not satisfied for f = -s
  CHECK(comparison.pde_status == PdeStatus::resolved);
  REQUIRE(comparison.levels.size() == 1);
  CHECK(comparison.levels[0].exploded == 0);
  CHECK(comparison.levels[0].completed == config.replicas);
}

TEST_CASE("initial sup-norm fit improves along n under an A2-true ell rule") {
  // Poisson initial data: with ell = (log n)^2 the A2 route to (A1) shows up
  // as a shrinking worst-case fit of X(0,.) to phi; with ell = 1 it does not.
  const auto phi = Profile::constant(0.5);
  const std::vector<int> sizes{16, 256, 4096};
  const int replicas = 8;

  auto worst_fit = [&](int n, double ell) {
    double worst = 0.0;
    for (int r = 0; r < replicas; ++r) {
      RngStream stream(424242, static_cast<std::uint32_t>(r),
                       RngStream::Channel::initial_condition);
      const auto c = sample_initial_density(n, ell, phi, stream);
      worst = std::max(worst, sup_norm_distance(density_field(c, ell), phi));
    }
    return worst;
  };

  const auto a2_rule = EllRule::poly_log(2.0);
  std::vector<double> with_rule, with_unit;
  for (const int n : sizes) {
    with_rule.push_back(worst_fit(n, a2_rule(double(n))));
    with_unit.push_back(worst_fit(n, 1.0));
  }
  CHECK(with_rule[0] > with_rule[1]);
  CHECK(with_rule[1] > with_rule[2]);
  CHECK(with_unit.back() >= with_unit.front());
}
