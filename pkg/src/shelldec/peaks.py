"""Peak location, border detection and closed-form initial term estimates.

A residual curve is scanned left to right for local extrema of |f| above a
threshold.  Each accepted peak gets a border pair (N1, N2) bounded by the
discrete inflection points or by the value dropping below a second
threshold, and a first (R, B, C) estimate from a logarithmic least-squares
Gaussian fit over that region.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .shells import FOUR_PI, FOUR_PI2, PI, SampledCurve, ShellTerm


class DegenerateFitError(ValueError):
    """Closed-form log fit has a singular normal system (all abscissae equal)."""


@dataclass(frozen=True)
class PeakRegion:
    """One accepted peak: extremum index, inclusive borders, sign, edge flag."""

    n_peak: int
    n1: int
    n2: int
    sign: int
    at_edge: bool = False

    def __post_init__(self) -> None:
        if not (0 <= self.n1 <= self.n_peak <= self.n2):
            raise ValueError(f"inconsistent peak region {self.n1}..{self.n_peak}..{self.n2}")
        if self.sign not in (-1, 1):
            raise ValueError(f"peak sign must be +1 or -1, got {self.sign}")


@dataclass
class LogFitSums:
    """Accumulators of the normal equations for the fit y ~ u - v*x^2."""

    n12: int
    sr2: float
    sr4: float
    sy: float
    syr2: float

    @classmethod
    def from_points(cls, x: np.ndarray, y: np.ndarray) -> "LogFitSums":
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        x2 = x * x
        return cls(
            n12=len(x),
            sr2=float(np.sum(x2)),
            sr4=float(np.sum(x2 * x2)),
            sy=float(np.sum(y)),
            syr2=float(np.sum(y * x2)),
        )

    def solve(self) -> tuple[float, float]:
        """Closed-form (u, v) minimizing sum[(u - v x^2) - y]^2."""
        if self.n12 < 2:
            raise DegenerateFitError("need at least two points")
        den = self.sr2 * self.sr2 - self.n12 * self.sr4
        # By Cauchy-Schwarz den <= 0 with equality iff all x^2 coincide.
        if abs(den) <= 1.0e-12 * max(self.sr2 * self.sr2, abs(self.n12 * self.sr4)):
            raise DegenerateFitError("singular fit: abscissae do not separate")
        u = (self.sr2 * self.syr2 - self.sr4 * self.sy) / den
        v = (self.n12 * self.syr2 - self.sr2 * self.sy) / den
        return u, v


def solve_log_ls(points) -> tuple[float, float]:
    """Fit y = u - v*x^2 through (x, y) pairs; raises DegenerateFitError."""
    pts = np.asarray(list(points), dtype=float)
    if pts.ndim != 2 or pts.shape[1] != 2 or pts.shape[0] < 2:
        raise DegenerateFitError("need at least two (x, y) points")
    if not np.all(np.isfinite(pts)):
        raise ValueError("fit points must be finite")
    return LogFitSums.from_points(pts[:, 0], pts[:, 1]).solve()


def find_next_peak(
    residual: SampledCurve, eps_dec_abs: float, start_index: int = 0
) -> PeakRegion | None:
    """First acceptable local extremum of |f| at index >= start_index.

    Interior points need |f_n| above both neighbours (left strictly, so a
    flat-topped peak reports its leftmost point); index 0 qualifies when
    |f_0| >= |f_1|; the last index only on a strictly monotone same-sign
    rise into the edge.  Returns None when nothing qualifies.
    """
    f = residual.f
    a = np.abs(f)
    n_last = len(f) - 1
    for n in range(max(start_index, 0), n_last + 1):
        if not a[n] > eps_dec_abs:
            continue
        if n == 0:
            ok = a[0] >= a[1]
        elif n == n_last:
            ok = (f[n_last] > f[n_last - 1] > 0.0) or (f[n_last] < f[n_last - 1] < 0.0)
        else:
            if not a[n] > a[n - 1]:
                continue
            # Walk over any plateau of equal magnitudes to its far side.
            j = n
            while j + 1 < n_last and a[j + 1] == a[n]:
                j += 1
            ok = a[j + 1] <= a[n] if j < n_last else True
        if ok:
            sign = 1 if f[n] > 0.0 else -1
            return PeakRegion(n_peak=n, n1=n, n2=n, sign=sign, at_edge=(n == n_last))
    return None


def peak_extent(curve: SampledCurve, n_peak: int, eps_peak_abs: float) -> tuple[int, int]:
    """Inclusive borders around a peak.

    Each side walks outward and stops at the first discrete inflection
    (second difference changing sign; exact zeroes extend the walk) or at
    the first point whose sign-flipped value drops below eps_peak_abs,
    whichever comes first.  The stopping point is part of the region.
    """
    f = curve.f
    n_last = len(f) - 1
    if not (0 <= n_peak <= n_last):
        raise IndexError(f"peak index {n_peak} outside grid")
    sign = 1.0 if f[n_peak] > 0.0 else -1.0
    g = sign * f

    def d2(n: int) -> float:
        return g[n - 1] - 2.0 * g[n] + g[n + 1]

    n2 = n_peak
    for n in range(n_peak + 1, n_last + 1):
        n2 = n
        if g[n] < eps_peak_abs:
            break
        if n < n_last and d2(n) > 0.0:
            break

    n1 = n_peak
    for n in range(n_peak - 1, -1, -1):
        n1 = n
        if g[n] < eps_peak_abs:
            break
        if n > 0 and d2(n) > 0.0:
            break

    return n1, n2


def estimate_term(curve: SampledCurve, region: PeakRegion, b_min: float) -> ShellTerm:
    """Initial (R, B, C) for one peak region.

    The shell radius is pinned to the peak grid point.  B and C come from
    the closed-form logarithmic fit: an origin peak is fitted in r^2, an
    interior one in (r - R)^2 against the single-Gaussian peak model.  A
    region of one or two points (or a degenerate fit) falls back to a term
    of width b_min whose value matches the curve at the peak.
    """
    if not (b_min > 0.0):
        raise ValueError(f"b_min must be > 0, got {b_min}")
    r, f = curve.r, curve.f
    n_peak = region.n_peak
    s = float(region.sign)
    g = s * f
    if not g[n_peak] > 0.0:
        raise ValueError("peak value must be positive after sign flip")
    R = float(r[n_peak])

    # The log fit needs positive values: shrink to the largest positive
    # stretch around the peak.
    lo, hi = n_peak, n_peak
    while lo - 1 >= region.n1 and g[lo - 1] > 0.0:
        lo -= 1
    while hi + 1 <= region.n2 and g[hi + 1] > 0.0:
        hi += 1

    B = C = None
    if hi - lo > 1:
        if n_peak == 0:
            x = r[lo:hi + 1]
            y = np.log(g[lo:hi + 1])
        else:
            x = r[lo:hi + 1] - R
            y = np.log(2.0 * g[lo:hi + 1] * R * R * math.sqrt(PI))
        try:
            u, v = LogFitSums.from_points(x, y).solve()
        except DegenerateFitError:
            v = -1.0
        if v > 0.0:
            B = FOUR_PI2 / v
            if n_peak == 0:
                C = PI**1.5 * v**-1.5 * math.exp(u)
            else:
                C = 2.0 * PI * math.exp(u) / math.sqrt(v)

    if B is None:
        # Narrow peak: width of one grid step, height matching the curve.
        B = b_min
        if n_peak == 0:
            C = g[0] * (B / FOUR_PI) ** 1.5
        else:
            C = 2.0 * g[n_peak] * R * R * math.sqrt(PI * B)

    return ShellTerm(R=R, B=B, C=s * C)


def scan_peaks(
    residual: SampledCurve,
    eps_dec_abs: float,
    eps_peak_abs: float,
    max_count: int | None = None,
) -> list[PeakRegion]:
    """All acceptable peaks of a residual in increasing order, with borders."""
    regions: list[PeakRegion] = []
    start = 0
    while max_count is None or len(regions) < max_count:
        hit = find_next_peak(residual, eps_dec_abs, start)
        if hit is None:
            break
        n1, n2 = peak_extent(residual, hit.n_peak, eps_peak_abs)
        regions.append(
            PeakRegion(n_peak=hit.n_peak, n1=n1, n2=n2, sign=hit.sign, at_edge=hit.at_edge)
        )
        start = hit.n_peak + 1
    return regions
