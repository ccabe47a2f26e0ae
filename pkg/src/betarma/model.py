"""The beta ARMA(p, q) recursion: mean path, conditional likelihood, score
and simulation.

The linked conditional mean is

    g(mu_t) = alpha + sum_i ar_i * g(y_{t-i}) + sum_j ma_j * r_{t-j},

with ``r_t = y_t - mu_t`` and ``r_t = 0`` for the first ``m = max(p, q)``
observations, which are conditioned on and excluded from the likelihood.

Parameter vectors are laid out as ``(alpha, ar_1..ar_p, ma_1..ma_q,
precision)`` everywhere.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numba
import numpy as np

from .beta import _draw
from .links import EPS, LinkKind, _link, _link_deriv, _link_inv_raw
from .special import DomainError, RngStream, _digamma

__all__ = [
    "BoundedSeries",
    "DEGENERATE_LOGLIK",
    "MeanPath",
    "ModelOrder",
    "ParamVector",
    "as_series",
    "cond_loglik",
    "cond_loglik_grad",
    "mean_recursion",
    "simulate",
]

# Returned by the likelihood when some mean hits the clamp boundary.
DEGENERATE_LOGLIK = -1e300


@dataclass(frozen=True)
class ModelOrder:
    p: int
    q: int

    def __post_init__(self):
        if self.p < 0 or self.q < 0:
            raise ValueError("orders must be non-negative")
        if self.p + self.q < 1:
            raise ValueError("at least one of p, q must be positive")

    @property
    def m(self) -> int:
        return max(self.p, self.q)

    @property
    def k(self) -> int:
        return self.p + self.q + 2

    def coord_names(self) -> list[str]:
        return (["alpha"] + [f"ar{i + 1}" for i in range(self.p)]
                + [f"ma{j + 1}" for j in range(self.q)] + ["precision"])


@dataclass(frozen=True)
class ParamVector:
    alpha: float
    ar: tuple[float, ...]
    ma: tuple[float, ...]
    precision: float

    def __post_init__(self):
        object.__setattr__(self, "alpha", float(self.alpha))
        object.__setattr__(self, "ar", tuple(float(v) for v in self.ar))
        object.__setattr__(self, "ma", tuple(float(v) for v in self.ma))
        object.__setattr__(self, "precision", float(self.precision))
        if not self.precision > 0:
            raise DomainError(f"precision must be positive, got {self.precision}")

    @property
    def order(self) -> ModelOrder:
        return ModelOrder(len(self.ar), len(self.ma))

    def to_array(self) -> np.ndarray:
        return np.array([self.alpha, *self.ar, *self.ma, self.precision])

    @classmethod
    def from_array(cls, values, order: ModelOrder) -> "ParamVector":
        values = np.asarray(values, dtype=float)
        if values.shape != (order.k,):
            raise ValueError(f"expected {order.k} values for order {order}, got {values.shape}")
        p, q = order.p, order.q
        return cls(values[0], values[1:1 + p], values[1 + p:1 + p + q], values[-1])


@dataclass(frozen=True)
class BoundedSeries:
    values: np.ndarray

    def __post_init__(self):
        v = np.ascontiguousarray(self.values, dtype=float)
        if v.ndim != 1 or v.size == 0:
            raise ValueError("series must be a non-empty 1-d array")
        bad = np.flatnonzero(~((v > 0) & (v < 1)))
        if bad.size:
            raise DomainError(f"values outside (0, 1) at positions {bad[:10].tolist()}")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @property
    def n(self) -> int:
        return self.values.size

    def __len__(self):
        return self.values.size


def as_series(y) -> BoundedSeries:
    return y if isinstance(y, BoundedSeries) else BoundedSeries(np.asarray(y, dtype=float))


@dataclass(frozen=True)
class MeanPath:
    """In-sample means and residuals; entries before ``m`` are NaN / zero."""

    mu: np.ndarray
    resid: np.ndarray
    m: int
    clamped: bool


# --------------------------------------------------------------------------
# numba kernels
# --------------------------------------------------------------------------

@numba.njit(cache=True, error_model="numpy")
def _transform(y, code):
    n = y.size
    gy = np.empty(n)
    logy = np.empty(n)
    log1my = np.empty(n)
    for t in range(n):
        gy[t] = _link(code, y[t])
        logy[t] = math.log(y[t])
        log1my[t] = math.log1p(-y[t])
    return gy, logy, log1my


@numba.njit(cache=True, error_model="numpy")
def _mean_path(coef, p, q, code, y, gy):
    n = y.size
    m = max(p, q)
    mu = np.full(n, np.nan)
    r = np.zeros(n)
    clamped = False
    alpha = coef[0]
    for t in range(m, n):
        eta = alpha
        for i in range(p):
            eta += coef[1 + i] * gy[t - 1 - i]
        for j in range(q):
            eta += coef[1 + p + j] * r[t - 1 - j]
        mt = _link_inv_raw(code, eta)
        if not (mt >= EPS and mt <= 1.0 - EPS):
            clamped = True
            mt = min(max(mt, EPS), 1.0 - EPS)
        mu[t] = mt
        r[t] = y[t] - mt
    return mu, r, clamped


@numba.njit(cache=True, error_model="numpy")
def _loglik(coef, p, q, code, y, gy, logy, log1my, want_grad, grad):
    """Conditional log-likelihood; fills ``grad`` (natural scale) if asked.

    Returns ``(loglik, clamped)``.
    """
    n = y.size
    m = max(p, q)
    nd = p + q + 1  # mean-structure coordinates
    prec = coef[nd]
    alpha = coef[0]
    r = np.zeros(n)
    dmu = np.zeros((n, nd)) if want_grad else np.zeros((1, 1))
    deta = np.empty(nd)
    if want_grad:
        for c in range(nd + 1):
            grad[c] = 0.0
    lg_prec = math.lgamma(prec)
    dg_prec = _digamma(prec) if want_grad else 0.0
    ll = 0.0
    clamped = False
    for t in range(m, n):
        eta = alpha
        for i in range(p):
            eta += coef[1 + i] * gy[t - 1 - i]
        for j in range(q):
            eta += coef[1 + p + j] * r[t - 1 - j]
        mt = _link_inv_raw(code, eta)
        if not (mt >= EPS and mt <= 1.0 - EPS):
            clamped = True
            mt = min(max(mt, EPS), 1.0 - EPS)
        r[t] = y[t] - mt
        a = mt * prec
        b = prec - a
        ll += lg_prec - math.lgamma(a) - math.lgamma(b) + (a - 1.0) * logy[t] + (b - 1.0) * log1my[t]
        if want_grad:
            deta[0] = 1.0
            for i in range(p):
                deta[1 + i] = gy[t - 1 - i]
            for j in range(q):
                deta[1 + p + j] = r[t - 1 - j]
            for j in range(q):
                th = coef[1 + p + j]
                for c in range(nd):
                    deta[c] -= th * dmu[t - 1 - j, c]
            inv_gp = 1.0 / _link_deriv(code, mt)
            psi_a = _digamma(a)
            psi_b = _digamma(b)
            dl_dmu = prec * (logy[t] - log1my[t] - psi_a + psi_b)
            for c in range(nd):
                dmu[t, c] = deta[c] * inv_gp
                grad[c] += dl_dmu * dmu[t, c]
            grad[nd] += (dg_prec - mt * psi_a - (1.0 - mt) * psi_b
                         + mt * logy[t] + (1.0 - mt) * log1my[t])
    return ll, clamped


@numba.njit(cache=True, error_model="numpy")
def _simulate(gen, coef, p, q, code, n, burn_in):
    m = max(p, q)
    total = m + burn_in + n
    alpha = coef[0]
    s = 0.0
    for i in range(p):
        s += coef[1 + i]
    g0 = alpha / (1.0 - s) if abs(s) < 1.0 else alpha
    prec = coef[p + q + 1]
    gy = np.empty(total)
    y = np.empty(total)
    r = np.zeros(total)
    for t in range(m):
        gy[t] = g0
    for t in range(m, total):
        eta = alpha
        for i in range(p):
            eta += coef[1 + i] * gy[t - 1 - i]
        for j in range(q):
            eta += coef[1 + p + j] * r[t - 1 - j]
        mt = min(max(_link_inv_raw(code, eta), EPS), 1.0 - EPS)
        yt = _draw(gen, mt, prec)
        y[t] = yt
        gy[t] = _link(code, yt)
        r[t] = yt - mt
    return y[total - n:].copy()


@numba.njit(cache=True, error_model="numpy")
def _hits_clamp(y):
    """True if a simulated value sits at the numerical clamp.

    Once a draw lands at ``EPS`` (or ``1 - EPS``) the AR term on the link
    scale pins the following means there too, so the series is degenerate.
    """
    for v in y:
        if v <= EPS or v >= 1.0 - EPS:
            return True
    return False


# --------------------------------------------------------------------------
# public API
# --------------------------------------------------------------------------

def _prepare(order: ModelOrder, params: ParamVector, y):
    y = as_series(y)
    if params.order != order:
        raise ValueError(f"parameter vector has order {params.order}, expected {order}")
    if y.n <= order.m:
        raise ValueError(f"series of length {y.n} too short for order {order}")
    return y.values, params.to_array()


def mean_recursion(order: ModelOrder, params: ParamVector, link, y) -> MeanPath:
    yv, coef = _prepare(order, params, y)
    code = LinkKind.parse(link).code
    gy, _, _ = _transform(yv, code)
    mu, r, clamped = _mean_path(coef, order.p, order.q, code, yv, gy)
    return MeanPath(mu=mu, resid=r, m=order.m, clamped=bool(clamped))


def _evaluate(order, params, link, y, want_grad):
    yv, coef = _prepare(order, params, y)
    code = LinkKind.parse(link).code
    gy, logy, log1my = _transform(yv, code)
    grad = np.zeros(order.k)
    ll, clamped = _loglik(coef, order.p, order.q, code, yv, gy, logy, log1my, want_grad, grad)
    return ll, clamped, grad


def cond_loglik(order: ModelOrder, params: ParamVector, link, y) -> float:
    """Log-likelihood conditional on the first ``m`` observations.

    Returns :data:`DEGENERATE_LOGLIK` if any conditional mean had to be
    clamped into the open unit interval.
    """
    ll, clamped, _ = _evaluate(order, params, link, y, False)
    return DEGENERATE_LOGLIK if clamped else float(ll)


def cond_loglik_grad(order: ModelOrder, params: ParamVector, link, y) -> np.ndarray:
    """Analytic gradient of :func:`cond_loglik` in parameter-vector layout."""
    _, _, grad = _evaluate(order, params, link, y, True)
    return grad


def simulate(order: ModelOrder, params: ParamVector, link, n: int,
             burn_in: int | None = None, rng: RngStream | None = None) -> BoundedSeries:
    """Simulate ``n`` observations after discarding ``burn_in`` draws.

    Lagged ``g(y)`` values before the start are set to the unconditional
    level ``alpha / (1 - sum(ar))`` when ``|sum(ar)| < 1`` (else ``alpha``);
    presample residuals are zero. ``burn_in`` defaults to ``100 + m``.
    """
    if params.order != order:
        raise ValueError(f"parameter vector has order {params.order}, expected {order}")
    if n < order.m + 2:
        raise ValueError(f"n must be at least m + 2 = {order.m + 2}")
    if burn_in is None:
        burn_in = 100 + order.m
    if burn_in < 0:
        raise ValueError("burn_in must be non-negative")
    if rng is None:
        raise ValueError("simulate needs an RngStream")
    code = LinkKind.parse(link).code
    values = _simulate(rng.generator, params.to_array(), order.p, order.q, code, int(n), int(burn_in))
    return BoundedSeries(values)
