"""Radial shell functions and their analytic derivatives.

The building block is the spherically symmetric density of a unit charge
spread uniformly over a sphere of radius R and blurred by an isotropic
Gaussian of width parameter B (units A^2).  Its radial component is

    omega(r; R, B) = 1/(r R) * sqrt(1/(4 pi B))
                     * [exp(-4 pi^2 (r-R)^2 / B) - exp(-4 pi^2 (r+R)^2 / B)]

with the R -> 0 limit equal to the plain blur Gaussian

    g(r; B) = (4 pi / B)^(3/2) * exp(-4 pi^2 r^2 / B).

A scaled term C * omega(r; R, B) is represented by :class:`ShellTerm`;
sampled radial data lives in :class:`SampledCurve`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

PI = math.pi
FOUR_PI = 4.0 * PI
FOUR_PI2 = 4.0 * PI * PI       # 4 pi^2
EIGHT_PI2 = 8.0 * PI * PI      # 8 pi^2

# Above this value of x = 8 pi^2 r R / B the second exponential of the
# shell function is below 1e-26 of the first one and sinh(x) would start
# to lose headroom, so the direct two-exponential form takes over.
_SINH_SWITCH = 30.0

# Grid regularity tolerance: |step_n - h| <= 1e-9 * h.
_GRID_RTOL = 1.0e-9


class GridError(ValueError):
    """Raised for grids violating the sampled-curve invariants."""


@dataclass(frozen=True)
class ShellTerm:
    """One scaled shell term C * omega(r; R, B).

    R >= 0 (A), B > 0 (A^2); C is a signed weight and must be nonzero for
    any term kept in a decomposition.
    """

    R: float
    B: float
    C: float

    def __post_init__(self) -> None:
        object.__setattr__(self, "R", float(self.R))
        object.__setattr__(self, "B", float(self.B))
        object.__setattr__(self, "C", float(self.C))
        if not (self.R >= 0.0):
            raise ValueError(f"shell radius must be >= 0, got {self.R}")
        if not (self.B > 0.0):
            raise ValueError(f"blur parameter must be > 0, got {self.B}")
        if not (self.C != 0.0 and math.isfinite(self.C)):
            raise ValueError(f"term weight must be finite and nonzero, got {self.C}")


@dataclass
class SampledCurve:
    """Radial function values f on a regular grid r with r[0] = 0."""

    r: np.ndarray
    f: np.ndarray
    label: str = ""
    h: float = field(init=False)

    def __post_init__(self) -> None:
        self.r = np.asarray(self.r, dtype=float)
        self.f = np.asarray(self.f, dtype=float)
        if self.r.ndim != 1 or self.f.ndim != 1:
            raise GridError("grid and values must be one-dimensional")
        if len(self.r) != len(self.f):
            raise GridError(f"grid and values differ in length: {len(self.r)} vs {len(self.f)}")
        if len(self.r) < 2:
            raise GridError("need at least two grid points")
        if self.r[0] != 0.0:
            raise GridError(f"grid must start at r = 0, got {self.r[0]}")
        steps = np.diff(self.r)
        h = float(self.r[1] - self.r[0])
        if h <= 0.0 or np.any(steps <= 0.0):
            raise GridError("grid must be strictly increasing")
        if np.any(np.abs(steps - h) > _GRID_RTOL * h):
            raise GridError("grid step is not regular")
        self.h = h

    def __len__(self) -> int:
        return len(self.r)

    def copy(self) -> "SampledCurve":
        return SampledCurve(self.r.copy(), self.f.copy(), self.label)


def make_grid(r_max: float, step: float) -> np.ndarray:
    """Regular grid [0, h, 2h, ..., ~r_max] suitable for SampledCurve."""
    if step <= 0.0 or r_max <= 0.0:
        raise GridError(f"grid needs r_max > 0 and step > 0, got {r_max}, {step}")
    n = int(round(r_max / step))
    if n < 1:
        raise GridError("grid would contain fewer than two points")
    return np.arange(n + 1) * step


def _check_blur(B: float) -> None:
    if not (B > 0.0):
        raise ValueError(f"blur parameter must be > 0, got {B}")


def gaussian_radial(r, B: float):
    """Normalized 3-D blur Gaussian, radial part: (4pi/B)^(3/2) exp(-4pi^2 r^2/B)."""
    _check_blur(B)
    r = np.asarray(r, dtype=float)
    return (FOUR_PI / B) ** 1.5 * np.exp(-FOUR_PI2 * r * r / B)


def omega_radial(r, R: float, B: float):
    """Radial shell function omega(r; R, B).

    R = 0 reduces exactly to gaussian_radial(r, B); at r = 0 with R > 0 the
    closed-form origin value (4pi/B)^(3/2) exp(-4pi^2 R^2/B) is used.  For
    r > 0 the difference of exponentials is evaluated through sinh to avoid
    cancellation when 8 pi^2 r R / B is small.
    """
    _check_blur(B)
    if R < 0.0:
        raise ValueError(f"shell radius must be >= 0, got {R}")
    r = np.asarray(r, dtype=float)
    if np.any(r < 0.0):
        raise ValueError("distances must be >= 0")
    if R == 0.0:
        return gaussian_radial(r, B)

    scalar = r.ndim == 0
    r = np.atleast_1d(r)
    out = np.empty_like(r)

    at_origin = r == 0.0
    out[at_origin] = (FOUR_PI / B) ** 1.5 * math.exp(-FOUR_PI2 * R * R / B)

    pos = ~at_origin
    rp = r[pos]
    x = EIGHT_PI2 * rp * R / B
    pref = 1.0 / (rp * R) * math.sqrt(1.0 / (FOUR_PI * B))
    vals = np.empty_like(rp)
    small = x < _SINH_SWITCH
    if np.any(small):
        rs = rp[small]
        c = FOUR_PI2 * (rs * rs + R * R) / B
        vals[small] = pref[small] * np.exp(-c) * 2.0 * np.sinh(x[small])
    big = ~small
    if np.any(big):
        rb = rp[big]
        e1 = np.exp(-FOUR_PI2 * (rb - R) ** 2 / B)
        e2 = np.exp(-FOUR_PI2 * (rb + R) ** 2 / B)
        vals[big] = pref[big] * (e1 - e2)
    out[pos] = vals
    return out[0] if scalar else out


def shell_peak_gaussian(r, R: float, B: float):
    """Single-Gaussian peak model: omega with its second exponential dropped.

    For R > 0: (1/R^2) sqrt(1/(4 pi B)) exp(-4 pi^2 (r-R)^2 / B);
    for R = 0 it coincides with gaussian_radial.
    """
    _check_blur(B)
    if R < 0.0:
        raise ValueError(f"shell radius must be >= 0, got {R}")
    r = np.asarray(r, dtype=float)
    if R == 0.0:
        return gaussian_radial(r, B)
    return (1.0 / (R * R)) * math.sqrt(1.0 / (FOUR_PI * B)) * np.exp(
        -FOUR_PI2 * (r - R) ** 2 / B
    )


def omega_gradient(r, term: ShellTerm):
    """Partials of C * omega(r; R, B) with respect to (R, B, C).

    Selects the analytic branch by parameter location: general (R > 0,
    r > 0), Gaussian terms (R = 0, where d/dR is defined as 0), and the
    origin point (r = 0 with R > 0).  Returns three arrays shaped like r.
    """
    R, B, C = term.R, term.B, term.C
    r = np.asarray(r, dtype=float)
    scalar = r.ndim == 0
    r = np.atleast_1d(r)
    if np.any(r < 0.0):
        raise ValueError("distances must be >= 0")

    d_R = np.zeros_like(r)
    d_B = np.empty_like(r)
    d_C = np.empty_like(r)

    if R == 0.0:
        e = np.exp(-FOUR_PI2 * r * r / B)
        d_B[:] = 4.0 * C * PI**1.5 * B**-3.5 * e * (EIGHT_PI2 * r * r - 3.0 * B)
        d_C[:] = (FOUR_PI / B) ** 1.5 * e
        return _maybe_scalar((d_R, d_B, d_C), scalar)

    at_origin = r == 0.0
    if np.any(at_origin):
        e0 = math.exp(-FOUR_PI2 * R * R / B)
        d_R[at_origin] = -64.0 * PI**3.5 * C * R * B**-2.5 * e0
        d_B[at_origin] = 4.0 * PI**1.5 * C * B**-3.5 * (EIGHT_PI2 * R * R - 3.0 * B) * e0
        d_C[at_origin] = (FOUR_PI / B) ** 1.5 * e0

    pos = ~at_origin
    if np.any(pos):
        rp = r[pos]
        x = EIGHT_PI2 * rp * R / B
        gR = np.empty_like(rp)
        gB = np.empty_like(rp)
        gC = np.empty_like(rp)

        small = x < _SINH_SWITCH
        if np.any(small):
            rs = rp[small]
            xs = x[small]
            e = np.exp(-FOUR_PI2 * (rs * rs + R * R) / B)
            ch, sh = np.cosh(xs), np.sinh(xs)
            # Brackets of the two-exponential derivatives recombined into
            # cosh/sinh so the small-x cancellation disappears.
            gR[small] = e * (16.0 * PI * PI * R * rs * ch
                             - 2.0 * (EIGHT_PI2 * R * R + B) * sh)
            p = EIGHT_PI2 * (rs * rs + R * R) - B
            w = 16.0 * PI * PI * rs * R
            gB[small] = e * 2.0 * (p * sh - w * ch)
            gC[small] = e * 2.0 * sh
        big = ~small
        if np.any(big):
            rb = rp[big]
            e1 = np.exp(-FOUR_PI2 * (rb - R) ** 2 / B)
            e2 = np.exp(-FOUR_PI2 * (rb + R) ** 2 / B)
            gR[big] = (e1 * (EIGHT_PI2 * R * (rb - R) - B)
                       + e2 * (EIGHT_PI2 * R * (rb + R) + B))
            gB[big] = (e1 * (EIGHT_PI2 * (rb - R) ** 2 - B)
                       - e2 * (EIGHT_PI2 * (rb + R) ** 2 - B))
            gC[big] = e1 - e2

        d_R[pos] = C * B**-1.5 / (2.0 * PI**0.5 * rp * R * R) * gR
        d_B[pos] = C * B**-2.5 / (4.0 * rp * R * PI**0.5) * gB
        d_C[pos] = 1.0 / (rp * R) * math.sqrt(1.0 / (FOUR_PI * B)) * gC

    return _maybe_scalar((d_R, d_B, d_C), scalar)


def _maybe_scalar(arrays, scalar: bool):
    if scalar:
        return tuple(float(a[0]) for a in arrays)
    return arrays


def term_peak_value(term: ShellTerm) -> float:
    """Magnitude of a term near its maximum (used as a truncation scale)."""
    probe = np.array([0.0, term.R])
    return float(np.max(np.abs(term.C * omega_radial(probe, term.R, term.B))))


def evaluate_sum(
    terms,
    r: np.ndarray,
    eps_term: float = 0.0,
    scale: float | None = None,
) -> np.ndarray:
    """Sum of scaled shell terms over a grid, with optional tail truncation.

    eps_term is a fraction of `scale` (the modeled curve's origin value when
    available, else the largest term peak).  Walking outward and inward from
    each term's peak grid point, grid points past the first one whose
    contribution drops below eps_term * scale are skipped.  eps_term = 0
    evaluates every term everywhere.
    """
    if eps_term < 0.0:
        raise ValueError(f"eps_term must be >= 0, got {eps_term}")
    r = np.asarray(r, dtype=float)
    if r.ndim != 1 or len(r) == 0:
        raise GridError("evaluation grid must be a nonempty 1-D array")
    out = np.zeros_like(r)
    terms = list(terms)
    if not terms:
        return out

    eps_abs = 0.0
    if eps_term > 0.0:
        if scale is None:
            scale = max(term_peak_value(t) for t in terms)
        eps_abs = eps_term * abs(scale)

    for t in terms:
        v = t.C * omega_radial(r, t.R, t.B)
        if eps_abs > 0.0:
            n_peak = int(np.argmin(np.abs(r - t.R)))
            below = np.abs(v) < eps_abs
            tail = np.nonzero(below[n_peak + 1:])[0]
            if tail.size:
                v[n_peak + 1 + tail[0] + 1:] = 0.0
            head = np.nonzero(below[:n_peak][::-1])[0]
            if head.size:
                cut = n_peak - 1 - head[0]
                v[:cut] = 0.0
        out += v
    return out
