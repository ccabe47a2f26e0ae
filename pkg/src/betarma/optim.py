"""Dense BFGS with a weak-Wolfe bisection line search, compiled with numba.

The objective is the negative conditional log-likelihood of a beta ARMA
model with the precision on the log scale (``negloglik``). It is bound at
module level rather than passed in so the compiled code can be cached on
disk. Non-finite objective values are treated as failed trial points.
"""

from __future__ import annotations

import math
from typing import NamedTuple

import numba
import numpy as np

from .model import _loglik

__all__ = ["BFGSResult", "bfgs", "minimize", "negloglik"]

CONVERGED_GRADIENT = 0
CONVERGED_STEP = 1
MAX_ITER = 2
LINE_SEARCH_FAILED = 3
BAD_START = 4

_C1 = 1e-4
_C2 = 0.9
_MAX_TRIALS = 60


class BFGSResult(NamedTuple):
    x: np.ndarray
    fun: float
    grad: np.ndarray
    iterations: int
    status: int

    @property
    def converged(self) -> bool:
        return self.status in (CONVERGED_GRADIENT, CONVERGED_STEP)


@numba.njit(cache=True, error_model="numpy")
def negloglik(x, args):
    """Negative log-likelihood and gradient at ``x = (alpha, ar, ma, log precision)``.

    ``args = (y, g(y), log y, log(1 - y), p, q, link_code)``.
    """
    y, gy, logy, log1my, p, q, code = args
    k = x.size
    grad = np.zeros(k)
    prec = math.exp(x[k - 1])
    if not (prec > 1e-8 and prec < 1e300):
        return np.inf, grad
    coef = x.copy()
    coef[k - 1] = prec
    ll, clamped = _loglik(coef, p, q, code, y, gy, logy, log1my, True, grad)
    if clamped or not np.isfinite(ll):
        return np.inf, grad
    grad[k - 1] *= prec
    return -ll, -grad


@numba.njit(cache=True, error_model="numpy")
def _sup(v):
    s = 0.0
    for i in range(v.size):
        a = abs(v[i])
        if a > s:
            s = a
    return s


@numba.njit(cache=True, error_model="numpy")
def _line_search(args, x, f, g, d, t):
    """Find t satisfying sufficient decrease and the weak curvature condition."""
    gd = g @ d
    lo = 0.0
    hi = np.inf
    for _ in range(_MAX_TRIALS):
        xt = x + t * d
        ft, gt = negloglik(xt, args)
        if not np.isfinite(ft) or ft > f + _C1 * t * gd:
            hi = t
            t = 0.5 * (lo + hi)
        elif gt @ d < _C2 * gd:
            lo = t
            t = 2.0 * t if hi == np.inf else 0.5 * (lo + hi)
        else:
            return True, t, xt, ft, gt
    return False, t, x, f, g


@numba.njit(cache=True, error_model="numpy")
def bfgs(x0, args, gtol, xtol, maxiter):
    """Minimize :func:`negloglik` from ``x0``.

    Stops when ``max|g| < gtol * (1 + |f|)`` or the step satisfies
    ``max|s| < xtol``. Returns ``(x, f, g, iterations, status)``.
    """
    nx = x0.size
    x = x0.copy()
    f, g = negloglik(x, args)
    if not np.isfinite(f) or not np.all(np.isfinite(g)):
        return x, f, g, 0, BAD_START
    eye = np.eye(nx)
    H = eye.copy()
    fresh = True  # H has not been updated since the last reset
    it = 0
    while it < maxiter:
        if _sup(g) < gtol * (1.0 + abs(f)):
            return x, f, g, it, CONVERGED_GRADIENT
        d = -(H @ g)
        if g @ d >= 0.0:
            H = eye.copy()
            fresh = True
            d = -g.copy()
        t0 = 1.0
        if fresh:
            dn = _sup(d)
            if dn > 1.0:
                t0 = 1.0 / dn
        ok, t, xn, fn, gn = _line_search(args, x, f, g, d, t0)
        it += 1
        if not ok:
            if fresh:
                return x, f, g, it, LINE_SEARCH_FAILED
            H = eye.copy()
            fresh = True
            continue
        s = xn - x
        yv = gn - g
        x = xn
        f = fn
        g = gn
        if _sup(s) < xtol:
            return x, f, g, it, CONVERGED_STEP
        sy = s @ yv
        if sy > 1e-300:
            if fresh:
                H = eye * (sy / (yv @ yv))
                fresh = False
            rho = 1.0 / sy
            Hy = H @ yv
            yHy = yv @ Hy
            H += (rho * rho * yHy + rho) * np.outer(s, s) - rho * (np.outer(Hy, s) + np.outer(s, Hy))
    if _sup(g) < gtol * (1.0 + abs(f)):
        return x, f, g, it, CONVERGED_GRADIENT
    return x, f, g, it, MAX_ITER


def minimize(x0, args, gtol=1e-6, xtol=1e-9, maxiter=500) -> BFGSResult:
    x, f, g, it, status = bfgs(np.asarray(x0, dtype=float), args, gtol, xtol, maxiter)
    return BFGSResult(x, float(f), g, int(it), int(status))
