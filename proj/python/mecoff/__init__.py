"""Offloading decision and MU-MIMO beamforming simulator (Python bindings)."""

from ._core import (
    default_config,
    lifted_sdp,
    oracle,
    run_scheme,
    solve_lifted_sdp,
    sweep,
    sweep_csv,
)

__all__ = [
    "default_config",
    "lifted_sdp",
    "oracle",
    "run_scheme",
    "solve_lifted_sdp",
    "sweep",
    "sweep_csv",
]
