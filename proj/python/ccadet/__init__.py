"""Blind detection of cell-edge users via canonical correlation analysis.

Thin Python layer over the compiled extension; all numerics live in C++.
"""

from _ccadet import (
    ConfigError,
    DimensionError,
    EnumerationCapError,
    NumericalError,
    array_response,
    cca_sync,
    detect_cca_racma,
    los_probability,
    principal_angles,
    racma_factorize,
    resolve_ambiguity,
    run_experiment,
    solve_cca,
    theoretical_rho_max,
    uma_path_gain,
)

__all__ = [
    "ConfigError",
    "DimensionError",
    "EnumerationCapError",
    "NumericalError",
    "array_response",
    "cca_sync",
    "detect_cca_racma",
    "los_probability",
    "principal_angles",
    "racma_factorize",
    "resolve_ambiguity",
    "run_experiment",
    "solve_cca",
    "theoretical_rho_max",
    "uma_path_gain",
]
