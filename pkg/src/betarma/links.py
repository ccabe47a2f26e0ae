"""Link functions mapping the unit interval to the real line.

Links are identified inside the numba kernels by the integer codes
``LOGIT``, ``PROBIT`` and ``CLOGLOG``; the public functions accept a
:class:`LinkKind` or its name.
"""

from __future__ import annotations

import enum
import math

import numba
import numpy as np

from .special import DomainError

__all__ = ["EPS", "LinkKind", "link", "link_deriv", "link_inv", "normal_quantile"]

LOGIT, PROBIT, CLOGLOG = 0, 1, 2

# Open-interval clamp shared by link inversion and beta sampling.
EPS = 10.0 * np.finfo(float).eps


class LinkKind(str, enum.Enum):
    LOGIT = "logit"
    PROBIT = "probit"
    CLOGLOG = "cloglog"

    @property
    def code(self) -> int:
        return _CODES[self]

    @classmethod
    def parse(cls, value) -> "LinkKind":
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).lower())
        except ValueError:
            names = ", ".join(k.value for k in cls)
            raise ValueError(f"unknown link {value!r}; expected one of {names}") from None


_CODES = {LinkKind.LOGIT: LOGIT, LinkKind.PROBIT: PROBIT, LinkKind.CLOGLOG: CLOGLOG}

# Acklam's rational approximation to the standard normal quantile.
_A = (-3.969683028665376e01, 2.209460984245205e02, -2.759285104469687e02,
      1.383577518672690e02, -3.066479806614716e01, 2.506628277459239e00)
_B = (-5.447609879822406e01, 1.615858368580409e02, -1.556989798598866e02,
      6.680131188771972e01, -1.328068155288572e01)
_C = (-7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e00,
      -2.549732539343734e00, 4.374664141464968e00, 2.938163982698783e00)
_D = (7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e00,
      3.754408661907416e00)
_P_LOW = 0.02425
_SQRT2 = math.sqrt(2.0)
_SQRT2PI = math.sqrt(2.0 * math.pi)


@numba.njit(cache=True, error_model="numpy")
def _norm_cdf(x):
    return 0.5 * math.erfc(-x / _SQRT2)


@numba.njit(cache=True, error_model="numpy")
def _norm_pdf(x):
    return math.exp(-0.5 * x * x) / _SQRT2PI


@numba.njit(cache=True, error_model="numpy")
def _norm_ppf(p):
    if p < _P_LOW:
        s = math.sqrt(-2.0 * math.log(p))
        x = ((((( _C[0] * s + _C[1]) * s + _C[2]) * s + _C[3]) * s + _C[4]) * s + _C[5]) / \
            ((((_D[0] * s + _D[1]) * s + _D[2]) * s + _D[3]) * s + 1.0)
    elif p <= 1.0 - _P_LOW:
        s = p - 0.5
        r = s * s
        x = (((((_A[0] * r + _A[1]) * r + _A[2]) * r + _A[3]) * r + _A[4]) * r + _A[5]) * s / \
            (((((_B[0] * r + _B[1]) * r + _B[2]) * r + _B[3]) * r + _B[4]) * r + 1.0)
    else:
        s = math.sqrt(-2.0 * math.log1p(-p))
        x = -((((( _C[0] * s + _C[1]) * s + _C[2]) * s + _C[3]) * s + _C[4]) * s + _C[5]) / \
            ((((_D[0] * s + _D[1]) * s + _D[2]) * s + _D[3]) * s + 1.0)
    # One Halley step on the CDF brings the 1e-9 approximation to ~1e-15.
    if p < 0.5:
        e = _norm_cdf(x) - p
    else:
        # Phi(x) - p written through upper tails to avoid cancellation
        e = (1.0 - p) - 0.5 * math.erfc(x / _SQRT2)
    u = e / _norm_pdf(x)
    return x - u / (1.0 + 0.5 * x * u)


@numba.njit(cache=True, error_model="numpy")
def _clamp(mu):
    if mu < EPS:
        return EPS
    if mu > 1.0 - EPS:
        return 1.0 - EPS
    return mu


@numba.njit(cache=True, error_model="numpy")
def _link(code, mu):
    if code == LOGIT:
        return math.log(mu / (1.0 - mu))
    if code == PROBIT:
        return _norm_ppf(mu)
    return math.log(-math.log1p(-mu))


@numba.njit(cache=True, error_model="numpy")
def _link_inv_raw(code, eta):
    if code == LOGIT:
        if eta >= 0.0:
            return 1.0 / (1.0 + math.exp(-eta))
        e = math.exp(eta)
        return e / (1.0 + e)
    if code == PROBIT:
        return _norm_cdf(eta)
    if eta > 7.0:
        return 1.0  # 1 - exp(-e^7) rounds to 1
    return -math.expm1(-math.exp(eta))


@numba.njit(cache=True, error_model="numpy")
def _link_inv(code, eta):
    return _clamp(_link_inv_raw(code, eta))


@numba.njit(cache=True, error_model="numpy")
def _link_deriv(code, mu):
    """dg/dmu."""
    if code == LOGIT:
        return 1.0 / (mu * (1.0 - mu))
    if code == PROBIT:
        return 1.0 / _norm_pdf(_norm_ppf(mu))
    return -1.0 / ((1.0 - mu) * math.log1p(-mu))


@numba.vectorize(["float64(int64, float64)"], cache=True)
def _link_ufunc(code, mu):
    return _link(code, mu)


@numba.vectorize(["float64(int64, float64)"], cache=True)
def _link_inv_ufunc(code, eta):
    return _link_inv(code, eta)


@numba.vectorize(["float64(int64, float64)"], cache=True)
def _link_deriv_ufunc(code, mu):
    return _link_deriv(code, mu)


def _open_unit(mu, name):
    arr = np.asarray(mu, dtype=float)
    if not np.all((arr > 0) & (arr < 1)):
        raise DomainError(f"{name} requires 0 < mu < 1")
    return arr


def _out(x, res):
    return float(res) if np.ndim(x) == 0 else res


def link(kind, mu):
    """Apply the link ``g(mu)``."""
    arr = _open_unit(mu, "link")
    return _out(mu, _link_ufunc(LinkKind.parse(kind).code, arr))


def link_inv(kind, eta):
    """Inverse link, clamped into ``[EPS, 1 - EPS]``."""
    arr = np.asarray(eta, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise DomainError("link_inv requires finite eta")
    return _out(eta, _link_inv_ufunc(LinkKind.parse(kind).code, arr))


def link_deriv(kind, mu):
    """First derivative ``g'(mu)``."""
    arr = _open_unit(mu, "link_deriv")
    return _out(mu, _link_deriv_ufunc(LinkKind.parse(kind).code, arr))


def normal_quantile(p: float) -> float:
    """Standard normal quantile, accurate to about 1e-15."""
    if not 0.0 < p < 1.0:
        raise DomainError("normal_quantile requires 0 < p < 1")
    return float(_norm_ppf(p))
