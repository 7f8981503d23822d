"""Bound-constrained smooth minimization used by the refinement stage.

Thin contract layer over scipy's limited-memory quasi-Newton minimizer with
box projection (L-BFGS-B).  Only lower bounds are supported; every point
passed to the callback is feasible and the returned value never exceeds the
starting one.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize as _scipy_minimize


class MinimizeStatus(enum.Enum):
    CONVERGED = "converged"
    MAX_ITERATIONS = "max-iterations"
    LINE_SEARCH_FAILURE = "line-search-failure"
    EVALUATION_FAILURE = "evaluation-failure"


@dataclass
class BoundedProblem:
    """Minimization task: dimension, per-variable lower bounds, start point.

    lower_bounds entries may be None (unbounded below).  The start point is
    projected onto the feasible box.  gradient_tol is relative: the stopping
    threshold is gradient_tol * max(1, |f(start)|).
    """

    dimension: int
    initial_point: np.ndarray
    lower_bounds: list[float | None] = field(default_factory=list)
    gradient_tol: float = 1.0e-10
    value_tol: float = 1.0e-15
    max_iterations: int = 500
    memory_depth: int = 7

    def __post_init__(self) -> None:
        self.initial_point = np.asarray(self.initial_point, dtype=float)
        if self.initial_point.shape != (self.dimension,):
            raise ValueError(
                f"initial point has shape {self.initial_point.shape}, expected ({self.dimension},)"
            )
        if not self.lower_bounds:
            self.lower_bounds = [None] * self.dimension
        if len(self.lower_bounds) != self.dimension:
            raise ValueError("one lower bound (or None) required per variable")
        if self.memory_depth < 1:
            raise ValueError("memory_depth must be >= 1")
        lo = np.array([-np.inf if b is None else float(b) for b in self.lower_bounds])
        self.initial_point = np.maximum(self.initial_point, lo)


class _EvaluationFailure(Exception):
    pass


def minimize(problem: BoundedProblem, evaluate) -> tuple[np.ndarray, float, MinimizeStatus]:
    """Minimize evaluate(x) -> (value, gradient) subject to x >= lower bounds.

    Returns (point, value, status); on a non-finite callback result the best
    feasible point seen so far is returned with EVALUATION_FAILURE.
    """
    lo = np.array(
        [-np.inf if b is None else float(b) for b in problem.lower_bounds], dtype=float
    )
    x0 = problem.initial_point
    best: dict = {"x": x0.copy(), "f": np.inf}

    def wrapped(x: np.ndarray):
        value, grad = evaluate(np.asarray(x, dtype=float))
        grad = np.asarray(grad, dtype=float)
        if not np.isfinite(value) or not np.all(np.isfinite(grad)):
            raise _EvaluationFailure()
        if value < best["f"]:
            best["f"] = float(value)
            best["x"] = np.array(x, dtype=float)
        return float(value), grad

    f0, _ = wrapped(x0)
    gtol = problem.gradient_tol * max(1.0, abs(f0))

    try:
        res = _scipy_minimize(
            wrapped,
            x0,
            jac=True,
            method="L-BFGS-B",
            bounds=[(b if np.isfinite(b) else None, None) for b in lo],
            options={
                "maxiter": problem.max_iterations,
                "maxcor": problem.memory_depth,
                "gtol": gtol,
                "ftol": problem.value_tol,
            },
        )
    except _EvaluationFailure:
        return best["x"], best["f"], MinimizeStatus.EVALUATION_FAILURE

    if res.fun <= best["f"]:
        best["x"], best["f"] = np.asarray(res.x, dtype=float), float(res.fun)
    if res.success:
        status = MinimizeStatus.CONVERGED
    elif res.status == 1:
        status = MinimizeStatus.MAX_ITERATIONS
    else:
        status = MinimizeStatus.LINE_SEARCH_FAILURE
    # The solver works inside the box, but guard against round-off.
    point = np.maximum(best["x"], lo)
    return point, best["f"], status
