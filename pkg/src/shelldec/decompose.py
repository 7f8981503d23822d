"""Iterative shell decomposition of a sampled radial curve.

The default protocol alternates four steps until the residual is below the
accuracy target or the term budget runs out: scan the residual left to
right for acceptable peaks, estimate one term per peak, jointly refine all
terms so far against the original curve, recompute the residual.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .optimize import BoundedProblem, MinimizeStatus, minimize
from .peaks import estimate_term, scan_peaks
from .shells import EIGHT_PI2, FOUR_PI, SampledCurve, ShellTerm, evaluate_sum, omega_gradient

log = logging.getLogger(__name__)

PROTOCOLS = ("iterative", "single_pass", "refine_each")


@dataclass
class DecomposeConfig:
    """Control parameters of the decomposition procedure.

    eps_dec is the accuracy target, by default a fraction of |f(0)| (set
    eps_dec_absolute for an absolute threshold).  eps_peak bounds the peak
    border walk and eps_term truncates term tails, both as fractions of
    |f(0)|.  Unset b_min / c_min are derived from the grid step and the
    accuracy target: b_min is the blur of a Gaussian whose inflection width
    equals one grid step, c_min the weight whose origin peak at b_min
    equals the absolute accuracy threshold.
    """

    eps_dec: float = 1.0e-3
    eps_dec_absolute: bool = False
    eps_peak: float = 5.0e-3
    eps_term: float = 1.0e-13
    max_peaks: int = 50
    protocol: str = "iterative"
    b_min: float | None = None
    c_min: float | None = None
    decompose_range: tuple[float, float] | None = None
    memory_depth: int = 7
    gradient_tol: float = 1.0e-10
    value_tol: float = 1.0e-15
    max_iterations: int = 500

    def __post_init__(self) -> None:
        if not (self.eps_dec > 0.0):
            raise ValueError(f"eps_dec must be > 0, got {self.eps_dec}")
        if not (self.eps_peak > 0.0):
            raise ValueError(f"eps_peak must be > 0, got {self.eps_peak}")
        if self.eps_term < 0.0:
            raise ValueError(f"eps_term must be >= 0, got {self.eps_term}")
        if self.max_peaks < 1:
            raise ValueError(f"max_peaks must be >= 1, got {self.max_peaks}")
        if self.b_min is not None and not (self.b_min > 0.0):
            raise ValueError(f"b_min must be > 0, got {self.b_min}")
        if self.c_min is not None and not (self.c_min > 0.0):
            raise ValueError(f"c_min must be > 0, got {self.c_min}")
        if self.protocol not in PROTOCOLS:
            raise ValueError(f"protocol must be one of {PROTOCOLS}, got {self.protocol!r}")
        if self.decompose_range is not None:
            lo, hi = self.decompose_range
            if not (0.0 <= lo < hi):
                raise ValueError(f"bad decompose_range {self.decompose_range}")


@dataclass(frozen=True)
class ResolvedThresholds:
    """Absolute thresholds and bounds for one concrete curve."""

    scale: float
    eps_dec_abs: float
    eps_peak_abs: float
    b_min: float
    c_min: float


def resolve_thresholds(curve: SampledCurve, config: DecomposeConfig) -> ResolvedThresholds:
    scale = abs(float(curve.f[0]))
    if scale == 0.0:
        scale = float(np.max(np.abs(curve.f)))
    eps_dec_abs = config.eps_dec if config.eps_dec_absolute else config.eps_dec * scale
    eps_peak_abs = config.eps_peak * scale
    b_min = config.b_min if config.b_min is not None else EIGHT_PI2 * curve.h**2
    c_min = (
        config.c_min
        if config.c_min is not None
        else eps_dec_abs * (b_min / FOUR_PI) ** 1.5
    )
    if c_min <= 0.0:  # zero curve: keep the bound positive
        c_min = np.finfo(float).tiny
    return ResolvedThresholds(scale, eps_dec_abs, eps_peak_abs, b_min, c_min)


@dataclass
class Decomposition:
    """Result of decomposing one curve."""

    terms: list[ShellTerm]
    initial_terms: list[ShellTerm]
    residual_max_full: float
    residual_max_range: float
    iterations_used: int
    converged: bool
    residual_history: list[float] = field(default_factory=list)


def score(curve: SampledCurve, terms) -> float:
    """Unweighted least-squares discrepancy 1/2 sum (f_n - model_n)^2.

    The model sum is never truncated here so the gradient stays exactly
    consistent with the scored objective.
    """
    e = curve.f - evaluate_sum(terms, curve.r)
    return 0.5 * float(np.dot(e, e))


def score_gradient(curve: SampledCurve, terms) -> np.ndarray:
    """Gradient of score over the concatenated (R_m, B_m, C_m) parameters."""
    terms = list(terms)
    e = curve.f - evaluate_sum(terms, curve.r)
    grad = np.empty(3 * len(terms))
    for m, t in enumerate(terms):
        d_r, d_b, d_c = omega_gradient(curve.r, t)
        grad[3 * m] = -float(np.dot(e, d_r))
        grad[3 * m + 1] = -float(np.dot(e, d_b))
        grad[3 * m + 2] = -float(np.dot(e, d_c))
    return grad


def refine(curve: SampledCurve, terms, config: DecomposeConfig) -> list[ShellTerm]:
    """Jointly refine all terms against the curve under lower bounds.

    Radii are bounded by 0, blurs by b_min and weight magnitudes by c_min
    with each weight's sign frozen to its estimate.  Never returns terms
    scoring worse than the input.
    """
    terms = list(terms)
    if not terms:
        raise ValueError("refine needs at least one term")
    th = resolve_thresholds(curve, config)
    signs = np.array([1.0 if t.C > 0 else -1.0 for t in terms])

    def unpack(z: np.ndarray) -> list[ShellTerm]:
        z = z.reshape(-1, 3)
        return [
            ShellTerm(R=row[0], B=row[1], C=s * row[2]) for row, s in zip(z, signs)
        ]

    def evaluate(z: np.ndarray):
        cur = unpack(z)
        val = score(curve, cur)
        grad = score_gradient(curve, cur)
        grad[2::3] *= signs  # d/d|C| = sign * d/dC
        return val, grad

    def run(start: np.ndarray):
        problem = BoundedProblem(
            dimension=3 * len(terms),
            initial_point=start,
            lower_bounds=[0.0, th.b_min, th.c_min] * len(terms),
            gradient_tol=config.gradient_tol,
            value_tol=config.value_tol,
            max_iterations=config.max_iterations,
            memory_depth=config.memory_depth,
        )
        return minimize(problem, evaluate)

    z0 = np.array([[t.R, t.B, abs(t.C)] for t in terms]).ravel()
    point, value, status = run(z0)
    if status is MinimizeStatus.EVALUATION_FAILURE:
        log.warning("refinement aborted on non-finite evaluation; keeping best point")
    point, value = _polish_radius_bound(point, value, run)
    if value > score(curve, terms):
        return terms
    return unpack(point)


def _polish_radius_bound(point: np.ndarray, value: float, run) -> tuple[np.ndarray, float]:
    """Collapse sub-resolution radii onto the R = 0 bound when that helps.

    A shell thinner than half the blur width is numerically next to
    indistinguishable from a Gaussian, which leaves the minimizer stranded
    at a small positive radius.  Restarting from the moment-matched
    Gaussian (B absorbing 8 pi^2 R^2 / 3) settles the radius exactly on its
    bound; the restart is kept only when it scores no worse.
    """
    for m in range(len(point) // 3):
        r_m, b_m = point[3 * m], point[3 * m + 1]
        if not (0.0 < r_m < 0.5 * np.sqrt(b_m / EIGHT_PI2)):
            continue
        start = point.copy()
        start[3 * m] = 0.0
        start[3 * m + 1] = b_m + EIGHT_PI2 * r_m * r_m / 3.0
        alt_point, alt_value, _ = run(start)
        if alt_value <= value:
            point, value = alt_point, alt_value
    return point, value


def _range_mask(curve: SampledCurve, config: DecomposeConfig) -> np.ndarray:
    if config.decompose_range is None:
        return np.ones(len(curve), dtype=bool)
    lo, hi = config.decompose_range
    mask = (curve.r >= lo) & (curve.r <= hi)
    if not mask.any():
        raise ValueError(f"decompose_range {config.decompose_range} misses the grid")
    return mask


def decompose(curve: SampledCurve, config: DecomposeConfig | None = None) -> Decomposition:
    """Run the full decomposition protocol on one curve."""
    config = config or DecomposeConfig()
    th = resolve_thresholds(curve, config)
    mask = _range_mask(curve, config)
    f = curve.f

    if not np.any(f):
        return Decomposition([], [], 0.0, 0.0, 0, True)

    terms: list[ShellTerm] = []
    initial: list[ShellTerm] = []
    history: list[float] = []
    residual = f.copy()
    res_full = float(np.max(np.abs(residual)))
    res_range = float(np.max(np.abs(residual[mask])))
    iterations = 0

    while len(terms) < config.max_peaks:
        res_curve = SampledCurve(curve.r, residual, curve.label)
        budget = config.max_peaks - len(terms)
        if config.protocol == "refine_each":
            regions = scan_peaks(res_curve, th.eps_dec_abs, th.eps_peak_abs, max_count=1)
        else:
            regions = scan_peaks(res_curve, th.eps_dec_abs, th.eps_peak_abs, max_count=budget)
        if not regions:
            break
        iterations += 1
        for region in regions:
            t = estimate_term(res_curve, region, th.b_min)
            terms.append(t)
            initial.append(t)

        terms = refine(curve, terms, config)
        residual = f - evaluate_sum(terms, curve.r, config.eps_term, th.scale)
        res_full = float(np.max(np.abs(residual)))
        res_range = float(np.max(np.abs(residual[mask])))
        history.append(res_range)

        if res_range <= th.eps_dec_abs:
            break
        if config.protocol == "single_pass":
            break

    converged = res_range <= th.eps_dec_abs
    return Decomposition(
        terms=terms,
        initial_terms=initial,
        residual_max_full=res_full,
        residual_max_range=res_range,
        iterations_used=iterations,
        converged=converged,
        residual_history=history,
    )
