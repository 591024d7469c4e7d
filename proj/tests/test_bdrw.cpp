#include <algorithm>
#include <cmath>
#include <vector>

#include <doctest.h>

#include "particle_limits/bdrw.hpp"
#include "particle_limits/lattice.hpp"
#include "particle_limits/rng.hpp"

using namespace particle_limits;

namespace {

Configuration unbounded_config(std::vector<std::int64_t> occ) {
  Configuration c;
  c.n = static_cast<int>(occ.size());
  c.kind = OccupationKind::unbounded;
  c.occupations = std::move(occ);
  return c;
}

RateFunctions pure_walk() { return RateFunctions{}; }

}  // namespace

TEST_CASE("total rate examples") {
  CHECK(bdrw_total_rate(unbounded_config({0, 0, 0}), pure_walk(), 3, 1.0) == 0.0);

  CHECK(bdrw_total_rate(unbounded_config({1, 0}), pure_walk(), 2, 1.0) ==
        doctest::Approx(8.0));

  RateFunctions linear_birth{RateFunction::linear(1.0), RateFunction::zero()};
  CHECK(bdrw_total_rate(unbounded_config({10, 10}), linear_birth, 2, 10.0) ==
        doctest::Approx(180.0));
}

TEST_CASE("pure walks conserve the particle number") {
  for (std::uint32_t replica = 0; replica < 30; ++replica) {
    RngStream init(300, replica, RngStream::Channel::initial_condition);
    const auto start = sample_initial_density(12, 5.0, Profile::constant(1.0), init);
    BdrwParams params;
    params.n = 12;
    params.ell = 5.0;
    params.horizon = 0.01;
    params.checkpoints = {0.0025, 0.005, 0.01};
    RngStream dyn(300, replica, RngStream::Channel::dynamics);
    const auto outcome = bdrw_run(start, pure_walk(), params, dyn);
    CHECK(outcome.status == RunStatus::completed);
    for (const auto& snap : outcome.trajectory.snapshots) {
      snap.config.validate();
      CHECK(snap.config.total_particles() == start.total_particles());
    }
  }
}

TEST_CASE("empty system with no birth is absorbing") {
  BdrwParams params;
  params.n = 6;
  params.ell = 2.0;
  params.horizon = 1.0;
  params.checkpoints = {0.5, 1.0};
  RngStream dyn(4, 0, RngStream::Channel::dynamics);
  const auto outcome = bdrw_run(unbounded_config({0, 0, 0, 0, 0, 0}), pure_walk(), params, dyn);
  CHECK(outcome.status == RunStatus::completed);
  CHECK(outcome.trajectory.event_count == 0);
  for (const auto& snap : outcome.trajectory.snapshots) {
    CHECK(snap.config.total_particles() == 0);
  }
}

TEST_CASE("runs are bit-for-bit reproducible") {
  RateFunctions rates{RateFunction::constant(0.7), RateFunction::linear(1.1)};
  BdrwParams params;
  params.n = 5;
  params.ell = 2.0;
  params.horizon = 0.4;
  params.checkpoints = {0.1, 0.2, 0.3, 0.4};
  const auto start = unbounded_config({2, 0, 1, 3, 0});
  RngStream a(555, 8, RngStream::Channel::dynamics);
  RngStream b(555, 8, RngStream::Channel::dynamics);
  const auto oa = bdrw_run(start, rates, params, a);
  const auto ob = bdrw_run(start, rates, params, b);
  CHECK(oa.trajectory.event_count == ob.trajectory.event_count);
  REQUIRE(oa.trajectory.snapshots.size() == ob.trajectory.snapshots.size());
  for (std::size_t i = 0; i < oa.trajectory.snapshots.size(); ++i) {
    CHECK(oa.trajectory.snapshots[i].config.occupations ==
          ob.trajectory.snapshots[i].config.occupations);
  }
}

TEST_CASE("small oracle: point mass at t = 0") {
  const auto init = unbounded_config({1, 0});
  const auto dist = bdrw_small_oracle(init, pure_walk(), 2, 1.0, 0.0, 4);
  CHECK(dist.probabilities[dist.state_index({1, 0})] == doctest::Approx(1.0));
  CHECK(dist.boundary_mass == 0.0);
}

TEST_CASE("small oracle: two-state walk relaxes to 1/2 and matches the closed form") {
  const auto init = unbounded_config({1, 0});
  // Both jump channels lead to the other site, so the occupied site flips at
  // total rate 2 n^2 = 8 and P(stay, t) = (1 + exp(-16 t)) / 2.
  for (const double t : {0.02, 0.1, 1.0}) {
    const auto dist = bdrw_small_oracle(init, pure_walk(), 2, 1.0, t, 3);
    const double stay = dist.probabilities[dist.state_index({1, 0})];
    const double moved = dist.probabilities[dist.state_index({0, 1})];
    CHECK(stay == doctest::Approx(0.5 * (1.0 + std::exp(-16.0 * t))).epsilon(1e-9));
    CHECK(stay + moved == doctest::Approx(1.0).epsilon(1e-10));
  }
  const auto late = bdrw_small_oracle(init, pure_walk(), 2, 1.0, 1.0, 3);
  CHECK(std::abs(late.probabilities[late.state_index({1, 0})] - 0.5) < 1e-6);
  CHECK(std::abs(late.probabilities[late.state_index({0, 1})] - 0.5) < 1e-6);
}

TEST_CASE("small oracle: M/M/inf site equilibrates to a truncated Poisson law") {
  // One site with constant birth lambda and death mu * eta is the M/M/inf
  // queue; detailed balance gives pi(k) proportional to (lambda/mu)^k / k!.
  const double lambda = 0.8;
  RateFunctions rates{RateFunction::constant(lambda), RateFunction::linear(1.0)};
  const auto init = unbounded_config({0});
  const int cap = 8;
  const auto dist = bdrw_small_oracle(init, rates, 1, 1.0, 12.0, cap);
  CHECK(dist.boundary_mass < 1e-4);

  std::vector<double> poisson_pmf(cap + 1);
  double mass = 0.0;
  for (int k = 0; k <= cap; ++k) {
    poisson_pmf[k] = std::exp(-lambda + k * std::log(lambda) - std::lgamma(k + 1.0));
    mass += poisson_pmf[k];
  }
  double interior = 0.0;
  for (int k = 0; k <= cap; ++k) {
    interior += dist.probabilities[dist.state_index({k})];
  }
  for (int k = 0; k <= cap; ++k) {
    CHECK(std::abs(dist.probabilities[dist.state_index({k})] / interior -
                   poisson_pmf[k] / mass) < 2e-4);
  }
}

TEST_CASE("simulated law matches the truncated oracle") {
  RateFunctions rates{RateFunction::constant(0.5), RateFunction::linear(1.0)};
  const auto init = unbounded_config({1, 0});
  const double t = 0.25;
  const int cap = 8;
  const auto oracle = bdrw_small_oracle(init, rates, 2, 1.0, t, cap);
  REQUIRE(oracle.boundary_mass < 1e-4);
  REQUIRE(oracle.truncation_error < 1e-10);

  BdrwParams params;
  params.n = 2;
  params.ell = 1.0;
  params.horizon = t;
  params.checkpoints = {t};
  const int replicas = 100000;
  std::vector<double> empirical(oracle.probabilities.size(), 0.0);
  for (int r = 0; r < replicas; ++r) {
    RngStream dyn(614, static_cast<std::uint32_t>(r), RngStream::Channel::dynamics);
    const auto outcome = bdrw_run(init, rates, params, dyn);
    REQUIRE(outcome.status == RunStatus::completed);
    const auto& occ = outcome.trajectory.snapshots.back().config.occupations;
    empirical[oracle.state_index(occ)] += 1.0 / replicas;
  }
  double tv = 0.0;
  for (std::size_t i = 0; i < empirical.size(); ++i) {
    tv += std::abs(empirical[i] - oracle.probabilities[i]);
  }
  CHECK(0.5 * tv <= 0.01);
}

TEST_CASE("quadratic birth explodes with a monotone threshold ladder") {
  RateFunctions rates{RateFunction::power(1.0, 2.0), RateFunction::zero()};
  const double ell = 50.0;
  RngStream init(99, 0, RngStream::Channel::initial_condition);
  const auto start = sample_initial_density(4, ell, Profile::constant(1.0), init);
  BdrwParams params;
  params.n = 4;
  params.ell = ell;
  params.horizon = 50.0;
  params.cap = 1000.0 * ell;
  RngStream dyn(99, 0, RngStream::Channel::dynamics);
  const auto outcome = bdrw_run(start, rates, params, dyn);
  REQUIRE(outcome.status == RunStatus::exploded);
  REQUIRE(outcome.threshold_hits.size() >= 4);
  for (std::size_t i = 1; i < outcome.threshold_hits.size(); ++i) {
    CHECK(outcome.threshold_hits[i].threshold > outcome.threshold_hits[i - 1].threshold);
    CHECK(outcome.threshold_hits[i].time >= outcome.threshold_hits[i - 1].time);
  }
  REQUIRE(outcome.tau_estimate.has_value());
  CHECK(*outcome.tau_estimate >= outcome.threshold_hits.back().time);
}

TEST_CASE("explosion time estimate brackets the mean-field blow-up") {
  // rho' = rho^2 from rho = 1 blows up at time 1; the particle median over a
  // few replicas should land well inside a 15% band already at ell = 100.
  RateFunctions rates{RateFunction::power(1.0, 2.0), RateFunction::zero()};
  const double ell = 100.0;
  BdrwParams params;
  params.n = 16;
  params.ell = ell;
  params.horizon = 50.0;
  params.cap = 1000.0 * ell;
  std::vector<double> taus;
  for (std::uint32_t replica = 0; replica < 21; ++replica) {
    RngStream init(1234, replica, RngStream::Channel::initial_condition);
    const auto start = sample_initial_density(16, ell, Profile::constant(1.0), init);
    RngStream dyn(1234, replica, RngStream::Channel::dynamics);
    const auto outcome = bdrw_run(start, rates, params, dyn);
    REQUIRE(outcome.status == RunStatus::exploded);
    taus.push_back(*outcome.tau_estimate);
  }
  std::sort(taus.begin(), taus.end());
  const double median = taus[taus.size() / 2];
  CHECK(std::abs(median - 1.0) < 0.15);
}

TEST_CASE("event budget exhaustion is reported distinctly") {
  RateFunctions rates{RateFunction::constant(5.0), RateFunction::zero()};
  BdrwParams params;
  params.n = 4;
  params.ell = 1.0;
  params.horizon = 100.0;
  params.event_budget = 50;
  RngStream dyn(7, 0, RngStream::Channel::dynamics);
  const auto outcome = bdrw_run(unbounded_config({1, 1, 1, 1}), rates, params, dyn);
  CHECK(outcome.status == RunStatus::budget_exhausted);
  CHECK(outcome.trajectory.event_count == 50);
}

TEST_CASE("oracle rejects oversized state spaces") {
  CHECK_THROWS_AS(bdrw_small_oracle(unbounded_config({0, 0, 0, 0}), pure_walk(), 4, 1.0,
                                    0.1, 4),
                  std::invalid_argument);
  CHECK_THROWS_AS(bdrw_small_oracle(unbounded_config({0, 0}), pure_walk(), 2, 1.0, 0.1, 9),
                  std::invalid_argument);
}

TEST_CASE("death rate must vanish at zero") {
  RateFunctions bad{RateFunction::zero(), RateFunction::constant(1.0)};
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}
