"""Smoke tests for the python bindings: each major operation is exercised
once with small inputs; the heavy verification lives in the C++ suites."""

import math

import pytest

import particle_limits as pl


def test_profile_families():
    cosine = pl.Profile.cosine(0.5, 0.25)
    assert cosine(0.0) == pytest.approx(0.75)
    assert cosine(0.5) == pytest.approx(0.25)
    spec = cosine.spec()
    again = pl.Profile.from_spec(spec)
    assert again(0.3) == cosine(0.3)


def test_exclusion_sampling_and_measure():
    config = pl.sample_initial_exclusion(64, pl.Profile.constant(0.5), seed=7)
    assert config.kind == pl.OccupationKind.exclusion
    assert all(v in (0, 1) for v in config.occupations)
    measure = pl.empirical_measure(config)
    assert measure.mass() == pytest.approx(config.total_particles() / 64)
    assert measure.mass() <= 1.0


def test_sampling_is_deterministic():
    a = pl.sample_initial_density(16, 50.0, pl.Profile.constant(1.0), seed=3, replica=2)
    b = pl.sample_initial_density(16, 50.0, pl.Profile.constant(1.0), seed=3, replica=2)
    assert a.occupations == b.occupations


def test_ssep_run_conserves_particles():
    init = pl.sample_initial_exclusion(32, pl.Profile.cosine(0.5, 0.25), seed=11)
    trajectory = pl.ssep_run(init, horizon=0.01, checkpoints=[0.005, 0.01], seed=11)
    assert len(trajectory.snapshots) == 2
    for snap in trajectory.snapshots:
        assert snap.config.total_particles() == init.total_particles()


def test_ssep_oracle_is_a_distribution():
    init = pl.Configuration(3, pl.OccupationKind.exclusion, [1, 0, 0])
    dist = pl.ssep_step_distribution_oracle(init, 0.2)
    assert sum(dist.probabilities) == pytest.approx(1.0, abs=1e-9)


def test_bdrw_run_and_total_rate():
    rates = pl.RateFunctions(pl.RateFunction.zero(), pl.RateFunction.zero())
    init = pl.Configuration(4, pl.OccupationKind.unbounded, [2, 0, 1, 0])
    assert pl.bdrw_total_rate(init, rates, 4, 1.0) == pytest.approx(2 * 16 * 3)
    outcome = pl.bdrw_run(init, rates, ell=1.0, horizon=0.02, checkpoints=[0.02], seed=5)
    assert outcome.status == pl.RunStatus.completed
    assert outcome.trajectory.snapshots[-1].config.total_particles() == 3


def test_bdrw_explosion_reports_tau():
    rates = pl.RateFunctions(pl.RateFunction.power(1.0, 2.0), pl.RateFunction.zero())
    init = pl.sample_initial_density(4, 50.0, pl.Profile.constant(1.0), seed=9)
    outcome = pl.bdrw_run(init, rates, ell=50.0, horizon=16.0, cap=1e3 * 50.0, seed=9)
    assert outcome.status == pl.RunStatus.exploded
    assert outcome.tau_estimate is not None
    assert 0.3 < outcome.tau_estimate < 3.0
    hits = outcome.threshold_hits
    assert all(hits[i].time <= hits[i + 1].time for i in range(len(hits) - 1))


def test_heat_solver_decays_cosine_mode():
    grid = pl.PdeGrid(m=128)
    solution = pl.solve_heat(pl.Profile.cosine(0.5, 0.5), 0.05, grid, [0.05])
    assert solution.status == pl.PdeStatus.resolved
    decay = math.exp(-4 * math.pi**2 * 0.05)
    assert solution.values[0][0] == pytest.approx(0.5 + 0.5 * decay, abs=1e-4)


def test_reaction_diffusion_blowup_estimate():
    rates = pl.RateFunctions(pl.RateFunction.power(1.0, 2.0), pl.RateFunction.zero())
    solution = pl.solve_reaction_diffusion(pl.Profile.constant(1.0), rates, 4.0,
                                           pl.PdeGrid(m=64))
    assert solution.status == pl.PdeStatus.blew_up
    assert solution.blowup_estimate == pytest.approx(1.0, rel=0.01)


def test_blowup_criterion_verdicts():
    quadratic = pl.RateFunctions(pl.RateFunction.power(1.0, 2.0), pl.RateFunction.zero())
    assert pl.check_blowup_criterion(quadratic, 1.0, 1e6).verdict == \
        pl.CriterionVerdict.satisfied
    linear = pl.RateFunctions(pl.RateFunction.linear(1.0), pl.RateFunction.zero())
    assert pl.check_blowup_criterion(linear, 1.0, 1e6).verdict == \
        pl.CriterionVerdict.not_satisfied


def test_a2_checker():
    grid = [0.01, 0.1, 1.0, 4.0]
    assert pl.check_a2(pl.EllRule.power(1.0), grid, 1e6).overall_convergent
    report = pl.check_a2(pl.EllRule.poly_log(1.0), grid, 1e6)
    assert not report.overall_convergent
    assert report.grid_relative_caveat


def test_density_field_and_sup_norm():
    config = pl.Configuration(2, pl.OccupationKind.unbounded, [0, 2])
    field = pl.density_field(config, 1.0)
    assert field(0.25) == pytest.approx(1.0)
    assert pl.sup_norm_distance(field, pl.Profile.constant(1.0)) == pytest.approx(1.0)


def test_hydrodynamic_study_report_shape():
    report = pl.hydrodynamic_study(pl.Profile.cosine(0.5, 0.25), sizes=[8, 16],
                                   horizon=0.01, checkpoints=[0.01], replicas=4,
                                   seed=2, grid_m=32)
    assert report["schema_version"] == pl.schema_version
    assert len(report["levels"]) == 2
    assert report["levels"][0]["replicas_used"] == 4
