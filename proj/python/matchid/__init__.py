"""Stable-matching identification under bandit feedback."""

from ._matchid import (
    MarketInstance,
    __version__,
    beta_characteristic_time,
    characteristic_time,
    example1,
    generate_instance,
    integrate_one_sided,
    is_unique_stable,
    kl,
    partition_B123,
    run,
    run_experiment,
    solve_one_sided,
    solve_two_sided,
    stable_matching,
    sweep_fig1,
    threshold,
    to_one_sided,
)

__all__ = [
    "MarketInstance",
    "__version__",
    "beta_characteristic_time",
    "characteristic_time",
    "example1",
    "generate_instance",
    "integrate_one_sided",
    "is_unique_stable",
    "kl",
    "partition_B123",
    "run",
    "run_experiment",
    "solve_one_sided",
    "solve_two_sided",
    "stable_matching",
    "sweep_fig1",
    "threshold",
    "to_one_sided",
]
