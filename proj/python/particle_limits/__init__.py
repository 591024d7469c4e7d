"""Exact lattice particle simulators with reference PDE solvers.

Thin wrapper over the compiled module: exclusion and birth-death walk
simulators on the discrete torus, heat / reaction-diffusion reference
solvers, the blow-up criterion and summability checkers, and the
scaling-limit studies.
"""

from ._particle_limits import (  # noqa: F401
    A2Report,
    BlowupCriterionReport,
    Configuration,
    CriterionVerdict,
    DensityField,
    EllRule,
    EmpiricalMeasure,
    OccupationKind,
    PdeGrid,
    PdeSolution,
    PdeStatus,
    Profile,
    RateFunction,
    RateFunctions,
    RunOutcome,
    RunStatus,
    Snapshot,
    SsepDistribution,
    ThresholdHit,
    Trajectory,
    TruncatedDistribution,
    bdrw_run,
    bdrw_small_oracle,
    bdrw_total_rate,
    blowup_study,
    check_a2,
    check_blowup_criterion,
    configuration_bits,
    density_field,
    empirical_measure,
    grid_field,
    high_density_study,
    hydrodynamic_study,
    sample_initial_density,
    sample_initial_exclusion,
    schema_version,
    solve_heat,
    solve_reaction_diffusion,
    ssep_run,
    ssep_step_distribution_oracle,
    sup_norm_distance,
)

__all__ = [name for name in dir() if not name.startswith("_")]
