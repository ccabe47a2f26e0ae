"""Beta distribution in the mean-precision parameterization.

Shapes are ``a = mu * phi`` and ``b = (1 - mu) * phi``, so the mean is
``mu`` and the variance ``mu * (1 - mu) / (1 + phi)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numba
import numpy as np

from .links import _clamp
from .special import DomainError, RngStream

__all__ = ["BetaMP", "log_pdf", "mean_var", "sample"]


@dataclass(frozen=True)
class BetaMP:
    mu: float
    phi: float

    def __post_init__(self):
        if not 0.0 < self.mu < 1.0:
            raise DomainError(f"mu must lie in (0, 1), got {self.mu}")
        if not self.phi > 0.0:
            raise DomainError(f"phi must be positive, got {self.phi}")

    @property
    def shapes(self) -> tuple[float, float]:
        return self.mu * self.phi, (1.0 - self.mu) * self.phi


@numba.njit(cache=True, error_model="numpy")
def _log_pdf(y, mu, phi):
    a = mu * phi
    b = (1.0 - mu) * phi
    return (math.lgamma(phi) - math.lgamma(a) - math.lgamma(b)
            + (a - 1.0) * math.log(y) + (b - 1.0) * math.log1p(-y))


@numba.vectorize(["float64(float64, float64, float64)"], cache=True)
def _log_pdf_ufunc(y, mu, phi):
    return _log_pdf(y, mu, phi)


@numba.njit(cache=True, error_model="numpy")
def _draw(gen, mu, phi):
    g1 = gen.standard_gamma(mu * phi)
    g2 = gen.standard_gamma((1.0 - mu) * phi)
    s = g1 + g2
    if s == 0.0:
        # both gammas underflowed; only possible for tiny shapes
        return _clamp(mu)
    return _clamp(g1 / s)


@numba.njit(cache=True, error_model="numpy")
def _draw_many(gen, mu, phi, size):
    out = np.empty(size)
    for i in range(size):
        out[i] = _draw(gen, mu, phi)
    return out


def log_pdf(d: BetaMP, y):
    """Log-density at ``y`` (scalar or array), all values in ``(0, 1)``."""
    arr = np.asarray(y, dtype=float)
    if not np.all((arr > 0) & (arr < 1)):
        raise DomainError("log_pdf requires 0 < y < 1")
    out = _log_pdf_ufunc(arr, d.mu, d.phi)
    return float(out) if np.ndim(y) == 0 else out


def mean_var(d: BetaMP) -> tuple[float, float]:
    return d.mu, d.mu * (1.0 - d.mu) / (1.0 + d.phi)


def sample(d: BetaMP, rng: RngStream, size=None):
    """Draw ``G1 / (G1 + G2)`` with ``G1 ~ Gamma(a)``, ``G2 ~ Gamma(b)``.

    Values are clamped into ``[EPS, 1 - EPS]`` so a draw is never exactly
    0 or 1.
    """
    if size is None:
        return float(_draw(rng.generator, d.mu, d.phi))
    return _draw_many(rng.generator, d.mu, d.phi, int(size))
