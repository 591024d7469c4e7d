#include <cmath>
#include <numbers>
#include <vector>

#include <doctest.h>

#include "particle_limits/lattice.hpp"
#include "particle_limits/profile.hpp"
#include "particle_limits/rng.hpp"

using namespace particle_limits;

namespace {

RngStream init_stream(std::uint64_t seed, std::uint32_t replica = 0) {
  return RngStream(seed, replica, RngStream::Channel::initial_condition);
}

}  // namespace

TEST_CASE("profile families evaluate and wrap periodically") {
  const auto c = Profile::constant(0.25);
  CHECK(c(0.0) == 0.25);
  CHECK(c(0.99) == 0.25);

  const auto cos_profile = Profile::cosine(0.5, 0.25);
  CHECK(cos_profile(0.0) == doctest::Approx(0.75));
  CHECK(cos_profile(0.5) == doctest::Approx(0.25));
  CHECK(cos_profile(1.25) == doctest::Approx(cos_profile(0.25)));
  CHECK(cos_profile(-0.25) == doctest::Approx(cos_profile(0.75)));

  const auto bump = Profile::logistic_bump(0.1, 0.8, 0.5, 0.15, 12.0);
  CHECK(bump(0.5) > 0.8);   // plateau top
  CHECK(bump(0.0) < 0.15);  // far side of the torus
  CHECK(bump(0.2) == doctest::Approx(bump(0.8)));  // symmetric around center
}

TEST_CASE("tabulated profile reproduces a smooth function") {
  const int knots = 64;
  std::vector<double> values(knots);
  for (int i = 0; i < knots; ++i) {
    values[i] = 1.0 + 0.5 * std::cos(2.0 * std::numbers::pi * i / knots);
  }
  const auto p = Profile::tabulated(values);
  for (int i = 0; i < 997; ++i) {
    const double u = double(i) / 997.0;
    const double exact = 1.0 + 0.5 * std::cos(2.0 * std::numbers::pi * u);
    CHECK(std::abs(p(u) - exact) < 2e-6);
  }
}

TEST_CASE("tabulated profile is exact on constants") {
  const auto p = Profile::tabulated(std::vector<double>(16, 0.7));
  for (int i = 0; i < 100; ++i) CHECK(p(i / 100.0) == doctest::Approx(0.7).epsilon(1e-14));
}

TEST_CASE("profile json round trip") {
  const auto p = Profile::cosine(0.5, 0.25, 2, 0.1);
  const auto q = Profile::from_json(p.to_json());
  for (int i = 0; i < 50; ++i) CHECK(p(i / 50.0) == q(i / 50.0));
  CHECK_THROWS(Profile::from_json(nlohmann::json{{"name", "triangle"}}));
}

TEST_CASE("exclusion sampling: degenerate profiles") {
  auto s0 = init_stream(1);
  const auto empty = sample_initial_exclusion(8, Profile::constant(0.0), s0);
  CHECK(empty.total_particles() == 0);
  CHECK(empty.kind == OccupationKind::exclusion);

  auto s1 = init_stream(1);
  const auto full = sample_initial_exclusion(8, Profile::constant(1.0), s1);
  CHECK(full.total_particles() == 8);
}

TEST_CASE("exclusion sampling: binomial concentration at half filling") {
  auto s = init_stream(2024);
  const int n = 10000;
  const auto c = sample_initial_exclusion(n, Profile::constant(0.5), s);
  const double mean = double(c.total_particles()) / n;
  CHECK(std::abs(mean - 0.5) < 0.02);  // 4 binomial standard deviations
}

TEST_CASE("exclusion sampling rejects profiles outside [0,1]") {
  auto s = init_stream(3);
  CHECK_THROWS_AS(sample_initial_exclusion(8, Profile::cosine(0.5, 0.7), s),
                  std::invalid_argument);
  auto s2 = init_stream(3);
  CHECK_THROWS_AS(sample_initial_exclusion(8, Profile::constant(1.5), s2),
                  std::invalid_argument);
}

TEST_CASE("exclusion sampling marginals match the profile") {
  const int n = 8;
  const auto phi = Profile::cosine(0.5, 0.25);
  const int replicas = 100000;
  std::vector<int> counts(n, 0);
  for (int r = 0; r < replicas; ++r) {
    auto s = init_stream(99, static_cast<std::uint32_t>(r));
    const auto c = sample_initial_exclusion(n, phi, s);
    for (int x = 0; x < n; ++x) counts[x] += static_cast<int>(c.occupations[x]);
  }
  for (int x = 0; x < n; ++x) {
    const double p = phi(double(x) / n);
    const double se = std::sqrt(p * (1.0 - p) / replicas);
    CHECK(std::abs(counts[x] / double(replicas) - p) < 3.0 * se);
  }
}

TEST_CASE("density sampling: zero profile, sup-norm closeness, per-site mean") {
  auto s0 = init_stream(4);
  const auto empty = sample_initial_density(8, 100.0, Profile::constant(0.0), s0);
  CHECK(empty.total_particles() == 0);
  CHECK(empty.kind == OccupationKind::unbounded);

  auto s1 = init_stream(5);
  const auto dense = sample_initial_density(16, 10000.0, Profile::constant(1.0), s1);
  const auto field = density_field(dense, 10000.0);
  CHECK(sup_norm_distance(field, Profile::constant(1.0)) <= 0.05);

  double sum = 0.0;
  const int replicas = 100000;
  for (int r = 0; r < replicas; ++r) {
    auto s = init_stream(6, static_cast<std::uint32_t>(r));
    const auto c = sample_initial_density(4, 1.0, Profile::constant(3.0), s);
    sum += double(c.total_particles()) / 4.0;
  }
  CHECK(std::abs(sum / replicas - 3.0) < 0.05);
}

TEST_CASE("density sampling rejects negative profiles") {
  auto s = init_stream(7);
  CHECK_THROWS_AS(sample_initial_density(8, 10.0, Profile::cosine(0.2, 0.5), s),
                  std::invalid_argument);
}

TEST_CASE("sampling is a deterministic function of the stream address") {
  auto a = init_stream(123, 9);
  auto b = init_stream(123, 9);
  const auto phi = Profile::cosine(0.5, 0.25);
  CHECK(sample_initial_exclusion(64, phi, a).occupations ==
        sample_initial_exclusion(64, phi, b).occupations);
}

TEST_CASE("empirical measure: mass, atoms, integration") {
  const Configuration empty{4, OccupationKind::exclusion, {0, 0, 0, 0}};
  CHECK(empirical_measure(empty).mass() == 0.0);

  const Configuration full{10, OccupationKind::exclusion,
                           {1, 1, 1, 1, 1, 1, 1, 1, 1, 1}};
  const auto m = empirical_measure(full);
  CHECK(m.mass() == doctest::Approx(1.0).epsilon(1e-15));
  const auto atoms = m.atoms();
  REQUIRE(atoms.size() == 10);
  for (const auto& [u, w] : atoms) CHECK(w == doctest::Approx(0.1).epsilon(1e-15));

  const Configuration mixed{3, OccupationKind::unbounded, {2, 0, 1}};
  CHECK(empirical_measure(mixed).integrate([](double) { return 1.0; }) ==
        doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("empirical measure mass equals total/n exactly and stays <= 1") {
  RngStream s(31, 0, RngStream::Channel::initial_condition);
  const auto c = sample_initial_exclusion(97, Profile::cosine(0.5, 0.5), s);
  const auto m = empirical_measure(c);
  CHECK(m.mass() == doctest::Approx(double(c.total_particles()) / 97).epsilon(1e-14));
  CHECK(m.mass() <= 1.0);
}

TEST_CASE("density field: constants, grid exactness, midpoint interpolation") {
  const Configuration zero{5, OccupationKind::unbounded, {0, 0, 0, 0, 0}};
  const auto f0 = density_field(zero, 3.0);
  for (int i = 0; i < 50; ++i) CHECK(f0(i / 50.0) == 0.0);

  const Configuration flat{4, OccupationKind::unbounded, {6, 6, 6, 6}};
  const auto f1 = density_field(flat, 3.0);
  for (int i = 0; i < 50; ++i) CHECK(f1(i / 50.0) == doctest::Approx(2.0).epsilon(1e-15));

  const Configuration two{2, OccupationKind::unbounded, {0, 2}};
  const auto f2 = density_field(two, 1.0);
  CHECK(f2(0.25) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(f2(0.0) == 0.0);   // exact at grid points
  CHECK(f2(0.5) == 2.0);
  CHECK(f2(0.75) == doctest::Approx(1.0).epsilon(1e-15));  // wraps at the seam
}

TEST_CASE("sup norm distance examples") {
  const Configuration two{2, OccupationKind::unbounded, {0, 2}};
  const auto f = density_field(two, 1.0);
  CHECK(sup_norm_distance(f, f) == 0.0);

  const auto fc = density_field(Configuration{4, OccupationKind::unbounded, {6, 6, 6, 6}}, 2.0);
  CHECK(sup_norm_distance(fc, Profile::constant(1.25)) == doctest::Approx(1.75));

  CHECK(sup_norm_distance(f, Profile::constant(1.0)) == doctest::Approx(1.0));
}

TEST_CASE("sup norm over merged grids of different sizes") {
  const auto a = grid_field({0.0, 1.0, 0.0, 1.0});
  const auto b = grid_field({0.0, 0.0, 0.0, 0.0, 0.0, 0.0});
  // Piecewise-linear peak of a is 1; b is flat zero.
  CHECK(sup_norm_distance(a, b) == doctest::Approx(1.0));
}

TEST_CASE("configuration validation catches violations") {
  Configuration bad{3, OccupationKind::exclusion, {0, 2, 0}};
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  Configuration negative{3, OccupationKind::unbounded, {0, -1, 0}};
  CHECK_THROWS_AS(negative.validate(), std::invalid_argument);
  Configuration wrong_len{3, OccupationKind::unbounded, {0, 1}};
  CHECK_THROWS_AS(wrong_len.validate(), std::invalid_argument);
}
