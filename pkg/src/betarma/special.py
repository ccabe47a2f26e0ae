"""Special functions and reproducible random streams.

``log_gamma`` defers to the C library ``lgamma`` (also used inside the
numba kernels); ``digamma`` is a shifted asymptotic series so it can be
called from jitted code, where ``scipy.special`` is not available.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numba
import numpy as np

__all__ = [
    "DomainError",
    "RngStream",
    "digamma",
    "log_gamma",
    "sample_gamma",
]


class DomainError(ValueError):
    """Argument outside the domain of a function."""


# Bernoulli-number coefficients B_2k / (2k) for the digamma asymptotic series.
_DIGAMMA_SERIES = (
    1.0 / 12.0,
    -1.0 / 120.0,
    1.0 / 252.0,
    -1.0 / 240.0,
    1.0 / 132.0,
    -691.0 / 32760.0,
    1.0 / 12.0,
)
_DIGAMMA_SHIFT = 6.0


@numba.njit(cache=True, error_model="numpy")
def _digamma(x):
    acc = 0.0
    while x < _DIGAMMA_SHIFT:
        acc -= 1.0 / x
        x += 1.0
    inv2 = 1.0 / (x * x)
    # Horner evaluation of sum_k c_k x^(-2k), k = 1..7
    poly = _DIGAMMA_SERIES[6]
    poly = _DIGAMMA_SERIES[5] + inv2 * poly
    poly = _DIGAMMA_SERIES[4] + inv2 * poly
    poly = _DIGAMMA_SERIES[3] + inv2 * poly
    poly = _DIGAMMA_SERIES[2] + inv2 * poly
    poly = _DIGAMMA_SERIES[1] + inv2 * poly
    poly = _DIGAMMA_SERIES[0] + inv2 * poly
    return acc + math.log(x) - 0.5 / x - inv2 * poly


@numba.njit(cache=True, error_model="numpy")
def _lgamma(x):
    return math.lgamma(x)


@numba.vectorize(["float64(float64)"], cache=True)
def _digamma_ufunc(x):
    return _digamma(x)


@numba.vectorize(["float64(float64)"], cache=True)
def _lgamma_ufunc(x):
    return math.lgamma(x)


def _positive_array(x, name):
    arr = np.asarray(x, dtype=float)
    if not np.all(arr > 0):
        raise DomainError(f"{name} requires x > 0")
    return arr


def _unwrap(x, out):
    return float(out) if np.ndim(x) == 0 else out


def log_gamma(x):
    """Natural log of the gamma function for positive ``x`` (scalar or array)."""
    arr = _positive_array(x, "log_gamma")
    return _unwrap(x, _lgamma_ufunc(arr))


def digamma(x):
    """Derivative of ``log_gamma`` for positive ``x`` (scalar or array)."""
    arr = _positive_array(x, "digamma")
    return _unwrap(x, _digamma_ufunc(arr))


@dataclass(frozen=True)
class RngStream:
    """Seeded random stream that can be split into independent substreams.

    A stream is identified by ``seed`` plus a tuple ``key`` of non-negative
    integers. ``substream(*ids)`` extends the key; streams with different
    keys are statistically independent (PCG64 seeded through
    ``numpy.random.SeedSequence`` with ``spawn_key=key``).

    The underlying ``numpy.random.Generator`` is created lazily and is
    stateful: draw from one stream in one task only.
    """

    seed: int
    key: tuple[int, ...] = ()
    _gen: list = field(default_factory=list, init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.seed < 0 or self.seed >= 2**64:
            raise ValueError("seed must be an unsigned 64-bit integer")

    def substream(self, *ids: int) -> "RngStream":
        return RngStream(self.seed, self.key + tuple(int(i) for i in ids))

    @property
    def generator(self) -> np.random.Generator:
        if not self._gen:
            ss = np.random.SeedSequence(self.seed, spawn_key=self.key)
            self._gen.append(np.random.Generator(np.random.PCG64(ss)))
        return self._gen[0]


def sample_gamma(shape, rng: RngStream, size=None):
    """Draw Gamma(shape, scale=1) variates.

    NumPy's ``standard_gamma`` is the Marsaglia-Tsang squeeze method, with the
    ``U**(1/shape)`` boost for ``shape < 1``.
    """
    if not np.all(np.asarray(shape, dtype=float) > 0):
        raise DomainError("sample_gamma requires shape > 0")
    return rng.generator.standard_gamma(shape, size=size)
