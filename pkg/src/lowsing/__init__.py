"""Orlicz-Besov regularity for stable-like operators driven by subordinate Brownian motion."""

from .orlicz import MeasuredSamples, NFunction, luxemburg_norm
from .symbols import CustomScale, SubordinatorSpec, jump_kernel, morrey_scale, potential_density
from .fields import (GridField, OutOfBandError, besov_norm, counterexample_field, decompose,
                     paraproduct, psi_block)
from .operator import (CoefficientField, DivergenceError, SolverConfig, apply_generator,
                       generator_symbol, solve_homogeneous, solve_inhomogeneous)
from .montecarlo import PathConfig, exit_time_mc, krylov_report, resolvent_mc, simulate_thinned_sde

__version__ = "0.1.0"

__all__ = [
    "NFunction", "MeasuredSamples", "luxemburg_norm",
    "SubordinatorSpec", "CustomScale", "jump_kernel", "morrey_scale", "potential_density",
    "GridField", "OutOfBandError", "psi_block", "decompose", "besov_norm", "paraproduct",
    "counterexample_field",
    "CoefficientField", "SolverConfig", "DivergenceError", "generator_symbol", "apply_generator",
    "solve_homogeneous", "solve_inhomogeneous",
    "PathConfig", "simulate_thinned_sde", "resolvent_mc", "krylov_report", "exit_time_mc",
]
