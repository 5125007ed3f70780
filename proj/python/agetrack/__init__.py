"""Output tracking for age-structured chemostat populations."""

from ._core import (
    AgetrackError,
    Certificate,
    ControllerGains,
    Equilibrium,
    InputBounds,
    ModelParams,
    Profile,
    Trajectory,
    build_certificate,
    characteristic_roots,
    control,
    load_config,
    make_constant,
    make_periodic,
    make_ramp,
    make_transition,
    overshoot_bound,
    parse_config,
    rate_constants,
    run_scenario,
    saturate,
    saturation_fact_check,
    simulate_galerkin,
    simulate_oracle,
    solve_equilibrium,
    validate_trajectory,
)

__all__ = [name for name in dir() if not name.startswith("_")]
