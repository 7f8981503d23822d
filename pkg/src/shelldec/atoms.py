"""Finite-resolution atomic images from tabulated scattering factors.

The image of an isolated scatterer in a map of resolution cutoff D with
isotropic displacement blur B0 is the radial Fourier integral

    rho(r) = 2/r * int_0^{1/D} s f(s) exp(-B0 s^2 / 4) sin(2 pi r s) ds

with the small-r limit 4 pi * int_0^{1/D} s^2 f(s) exp(-B0 s^2 / 4) ds.
Integrals are evaluated by composite Simpson quadrature on a fine s grid.

Scattering factors f(s) are multi-Gaussian parameterizations read from a
plain-text table; each record carries a convention token telling whether
the tabulated exponents expect sin(theta)/lambda (the usual published
form) or s = 2 sin(theta)/lambda directly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

import numpy as np

from .shells import FOUR_PI, SampledCurve, make_grid

CONVENTIONS = ("stol", "s")

# Relative switch radius below which the small-r integrand replaces the
# general one.  The small-r form carries a relative error of roughly
# 0.1 * (2 pi r / D)^2, so this keeps the two branches within 1e-8 of each
# other; the sin(2 pi r s)/r form stays well conditioned above it.
SMALL_R_FACTOR = 2.0e-5


class TableFormatError(ValueError):
    """Malformed scattering-factor table."""


@dataclass(frozen=True)
class ScatteringFactor:
    """Multi-Gaussian scattering function of one atom or ion."""

    label: str
    gaussians: tuple[tuple[float, float], ...]
    constant: float = 0.0
    convention: str = "stol"

    def __post_init__(self) -> None:
        if len(self.gaussians) < 1:
            raise ValueError("scattering factor needs at least one Gaussian term")
        if self.convention not in CONVENTIONS:
            raise ValueError(
                f"unknown argument convention {self.convention!r}; expected one of {CONVENTIONS}"
            )
        for a, b in self.gaussians:
            if not (math.isfinite(a) and math.isfinite(b)):
                raise ValueError(f"non-finite Gaussian coefficients in {self.label!r}")


@dataclass(frozen=True)
class AtomImageSpec:
    """Requested image: resolution cutoff D (A), blur B0 (A^2) and r grid."""

    label: str
    resolution: float
    b0: float = 0.0
    r_max: float = 8.0
    step: float = 0.01
    s_points: int = 2001

    def __post_init__(self) -> None:
        if not (self.resolution > 0.0):
            raise ValueError(f"resolution cutoff must be > 0, got {self.resolution}")
        if self.b0 < 0.0:
            raise ValueError(f"displacement parameter must be >= 0, got {self.b0}")
        if self.s_points < 3:
            raise ValueError("need at least three quadrature points")


def scattering_factor(sf: ScatteringFactor, s) -> np.ndarray:
    """f(s) with s = 2 sin(theta)/lambda = 1/d."""
    s = np.asarray(s, dtype=float)
    if np.any(s < 0.0):
        raise ValueError("scattering argument must be >= 0")
    arg = (s / 2.0) ** 2 if sf.convention == "stol" else s * s
    out = np.full_like(s, float(sf.constant))
    for a, b in sf.gaussians:
        out = out + a * np.exp(-b * arg)
    return out


def load_scattering_table(path) -> list[ScatteringFactor]:
    """Parse a table file: `label K a1 b1 ... aK bK c convention` per line.

    Lines starting with '#' and blank lines are skipped.  Duplicate labels
    and malformed records are rejected with the offending line number.
    """
    entries: list[ScatteringFactor] = []
    seen: set[str] = set()
    text = Path(path).read_text()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        tokens = line.split()
        try:
            label = tokens[0]
            count = int(tokens[1])
            if count < 1:
                raise ValueError("Gaussian count must be >= 1")
            need = 2 + 2 * count + 2
            if len(tokens) != need:
                raise ValueError(f"expected {need} fields, found {len(tokens)}")
            pairs = tuple(
                (float(tokens[2 + 2 * i]), float(tokens[3 + 2 * i])) for i in range(count)
            )
            constant = float(tokens[2 + 2 * count])
            convention = tokens[3 + 2 * count]
            sf = ScatteringFactor(label, pairs, constant, convention)
        except (ValueError, IndexError) as exc:
            raise TableFormatError(f"{path}:{lineno}: {exc}") from exc
        if label in seen:
            raise TableFormatError(f"{path}:{lineno}: duplicate scatterer label {label!r}")
        seen.add(label)
        entries.append(sf)
    if not entries:
        raise TableFormatError(f"{path}: no scatterer records found")
    return entries


def default_table_path() -> Path:
    """Bundled table of common neutral-atom scattering factors."""
    return Path(resources.files("shelldec").joinpath("data/sf_it92.tbl"))


def simpson_integrate(values, step: float) -> float:
    """Composite Simpson estimate over an odd number of regular samples."""
    values = np.asarray(values, dtype=float)
    if values.ndim != 1 or len(values) < 3:
        raise ValueError("Simpson quadrature needs at least three samples")
    if len(values) % 2 == 0:
        raise ValueError("Simpson quadrature needs an odd sample count")
    if not (step > 0.0):
        raise ValueError(f"grid step must be > 0, got {step}")
    return float(np.dot(_simpson_weights(len(values)), values)) * step / 3.0


def _simpson_weights(n: int) -> np.ndarray:
    w = np.ones(n)
    w[1:-1:2] = 4.0
    w[2:-1:2] = 2.0
    return w


def atom_image(sf: ScatteringFactor, spec: AtomImageSpec) -> SampledCurve:
    """Radial image of one scatterer on the requested grid."""
    r = make_grid(spec.r_max, spec.step)
    n_s = spec.s_points if spec.s_points % 2 == 1 else spec.s_points + 1
    s_max = 1.0 / spec.resolution
    s = np.linspace(0.0, s_max, n_s)
    ds = s_max / (n_s - 1)
    damped = scattering_factor(sf, s) * np.exp(-spec.b0 * s * s / 4.0)
    weights = _simpson_weights(n_s) * ds / 3.0

    small_r = r < SMALL_R_FACTOR * spec.resolution
    f = np.empty_like(r)
    if np.any(small_r):
        f[small_r] = FOUR_PI * np.dot(weights, s * s * damped)
    rr = r[~small_r]
    if rr.size:
        # One row per r value: 2/r * int s f(s) exp(-B0 s^2/4) sin(2 pi r s) ds
        sins = np.sin(2.0 * math.pi * np.outer(rr, s))
        f[~small_r] = (2.0 / rr) * (sins @ (weights * s * damped))
    return SampledCurve(r, f, label=sf.label)
