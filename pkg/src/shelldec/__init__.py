"""Shell decomposition of oscillating radial functions."""

from .decompose import (
    DecomposeConfig,
    Decomposition,
    decompose,
    refine,
    resolve_thresholds,
    score,
    score_gradient,
)
from .shells import (
    SampledCurve,
    ShellTerm,
    evaluate_sum,
    gaussian_radial,
    make_grid,
    omega_gradient,
    omega_radial,
    shell_peak_gaussian,
)

__all__ = [
    "DecomposeConfig",
    "Decomposition",
    "SampledCurve",
    "ShellTerm",
    "decompose",
    "evaluate_sum",
    "gaussian_radial",
    "make_grid",
    "omega_gradient",
    "omega_radial",
    "refine",
    "resolve_thresholds",
    "score",
    "score_gradient",
    "shell_peak_gaussian",
]
