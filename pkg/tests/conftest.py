import numpy as np
import pytest

from shelldec import SampledCurve, make_grid


def interference_values(x: np.ndarray) -> np.ndarray:
    """Radial Fourier transform of a unit ball, G(x) = 3(sin u - u cos u)/u^3."""
    u = 2.0 * np.pi * np.asarray(x, dtype=float)
    out = np.empty_like(u)
    zero = u == 0.0
    out[zero] = 1.0
    uu = u[~zero]
    out[~zero] = 3.0 * (np.sin(uu) - uu * np.cos(uu)) / uu**3
    return out


@pytest.fixture
def interference_curve() -> SampledCurve:
    r = make_grid(8.0, 0.01)
    return SampledCurve(r, interference_values(r), label="G")


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20260810)
