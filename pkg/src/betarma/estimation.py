"""Conditional maximum likelihood for beta ARMA models.

The precision is optimized on the log scale with the in-repo BFGS; the
information matrix is the negated Hessian of the log-likelihood in the
natural parameterization, obtained by central differences of the analytic
score.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numba
import numpy as np

from .links import LinkKind, _link, _link_deriv, _link_inv_raw, normal_quantile
from .model import (
    ModelOrder,
    ParamVector,
    _loglik,
    _transform,
    as_series,
)
from .optim import CONVERGED_GRADIENT, CONVERGED_STEP, bfgs

__all__ = [
    "ConfidenceInterval",
    "FitOptions",
    "FitReport",
    "asymptotic_ci",
    "fit",
    "information_matrix",
    "starting_values",
]

CI_KINDS = ("asymptotic", "boot_se", "boot_t", "percentile", "unbiased_centered")

_STATUS_TEXT = {
    0: "gradient tolerance reached",
    1: "parameter step below tolerance",
    2: "iteration limit reached",
    3: "line search failed",
    4: "non-finite likelihood at starting values",
}


class EstimationError(RuntimeError):
    pass


@dataclass(frozen=True)
class ConfidenceInterval:
    lower: float
    upper: float
    level: float
    kind: str
    param: str = ""

    def __post_init__(self):
        if self.kind not in CI_KINDS:
            raise ValueError(f"unknown interval kind {self.kind!r}")
        if not 0.5 < self.level < 1.0:
            raise ValueError("level must lie in (0.5, 1)")
        if self.lower > self.upper:
            raise ValueError("lower bound exceeds upper bound")

    def contains(self, value: float) -> bool:
        return self.lower <= value <= self.upper

    @property
    def width(self) -> float:
        return self.upper - self.lower


@dataclass(frozen=True)
class FitOptions:
    gtol: float = 1e-6
    xtol: float = 1e-9
    maxiter: int = 500
    compute_info: bool = True
    start: ParamVector | None = None


@dataclass
class FitReport:
    estimate: ParamVector
    loglik: float
    info_matrix: np.ndarray | None
    converged: bool
    iterations: int
    grad_norm: float
    order: ModelOrder
    link: LinkKind
    n: int
    message: str = ""
    start_fallback: bool = False
    start: ParamVector | None = field(default=None, repr=False)

    @property
    def aic(self) -> float:
        return -2.0 * self.loglik + 2.0 * self.order.k

    def covariance(self) -> np.ndarray:
        """Inverse of the information matrix."""
        if self.info_matrix is None:
            raise EstimationError("fit was run without an information matrix")
        return np.linalg.inv(self.info_matrix)

    def to_dict(self) -> dict:
        est = self.estimate
        info = None if self.info_matrix is None else self.info_matrix.tolist()
        return {
            "alpha": est.alpha,
            "ar": list(est.ar),
            "ma": list(est.ma),
            "precision": est.precision,
            "loglik": self.loglik,
            "converged": self.converged,
            "iterations": self.iterations,
            "grad_norm": self.grad_norm,
            "info_matrix": info,
            "p": self.order.p,
            "q": self.order.q,
            "link": self.link.value,
            "n": self.n,
            "aic": self.aic,
            "message": self.message,
        }

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), **kw)

    @classmethod
    def from_dict(cls, d: dict) -> "FitReport":
        order = ModelOrder(int(d["p"]), int(d["q"]))
        info = d.get("info_matrix")
        return cls(
            estimate=ParamVector(d["alpha"], d["ar"], d["ma"], d["precision"]),
            loglik=float(d["loglik"]),
            info_matrix=None if info is None else np.asarray(info, dtype=float),
            converged=bool(d["converged"]),
            iterations=int(d["iterations"]),
            grad_norm=float(d["grad_norm"]),
            order=order,
            link=LinkKind.parse(d.get("link", "logit")),
            n=int(d.get("n", 0)),
            message=d.get("message", ""),
        )


# --------------------------------------------------------------------------
# kernels
# --------------------------------------------------------------------------

@numba.njit(cache=True, error_model="numpy")
def _start(y, gy, p, q, code):
    """OLS start for (alpha, ar), zeros for ma, beta-regression precision."""
    m = max(p, q)
    nobs = y.size - m
    ncol = 1 + p
    coef = np.zeros(p + q + 2)
    X = np.ones((nobs, ncol))
    Y = gy[m:].copy()
    for i in range(p):
        for t in range(nobs):
            X[t, 1 + i] = gy[m + t - 1 - i]
    singular = nobs <= ncol
    beta = np.zeros(ncol)
    if not singular:
        XtX = X.T @ X
        # relative pivot check before solving
        if np.linalg.cond(XtX) > 1e12:
            singular = True
        else:
            beta = np.linalg.solve(XtX, X.T @ Y)
    if singular:
        return coef, True
    for c in range(ncol):
        coef[c] = beta[c]
    fitted = X @ beta
    resid = Y - fitted
    evar = (resid @ resid) / (nobs - ncol)
    acc = 0.0
    for t in range(nobs):
        mt = _link_inv_raw(code, fitted[t])
        mt = min(max(mt, 1e-12), 1.0 - 1e-12)
        gp = _link_deriv(code, mt)
        sig2 = evar / (gp * gp)
        acc += mt * (1.0 - mt) / sig2 - 1.0
    prec = acc / nobs
    if not (prec > 0.1):
        prec = 0.1
    elif prec > 1e8:
        prec = 1e8  # near-perfect regression fit
    coef[p + q + 1] = prec
    return coef, False


@numba.njit(cache=True, error_model="numpy")
def _optimize(y, gy, logy, log1my, p, q, code, start, gtol, xtol, maxiter):
    x0 = start.copy()
    x0[x0.size - 1] = math.log(start[start.size - 1])
    args = (y, gy, logy, log1my, p, q, code)
    x, f, g, it, status = bfgs(x0, args, gtol, xtol, maxiter)
    est = x.copy()
    est[est.size - 1] = math.exp(x[x.size - 1])
    return est, -f, _sup_abs(g), it, status


@numba.njit(cache=True, error_model="numpy")
def _sup_abs(v):
    s = 0.0
    for i in range(v.size):
        s = max(s, abs(v[i]))
    return s


@numba.njit(cache=True, error_model="numpy")
def _choose_start(y, gy, logy, log1my, p, q, code):
    """OLS start, or the moment start if OLS is singular or not finite."""
    start, fallback = _start(y, gy, p, q, code)
    if not fallback:
        grad = np.zeros(1)
        ll, clamped = _loglik(start, p, q, code, y, gy, logy, log1my, False, grad)
        fallback = clamped or not math.isfinite(ll)
    if fallback:
        start = _fallback_start(y, p, q, code)
    return start, fallback


@numba.njit(cache=True, error_model="numpy")
def _fit_series(y, p, q, code, gtol, xtol, maxiter):
    gy, logy, log1my = _transform(y, code)
    start, fallback = _choose_start(y, gy, logy, log1my, p, q, code)
    est, ll, gnorm, it, status = _optimize(y, gy, logy, log1my, p, q, code, start, gtol, xtol, maxiter)
    return est, ll, gnorm, it, status, start


@numba.njit(cache=True, error_model="numpy")
def _fallback_start(y, p, q, code):
    n = y.size
    coef = np.zeros(p + q + 2)
    ybar = 0.0
    for t in range(n):
        ybar += y[t]
    ybar /= n
    coef[0] = _link(code, ybar)
    var = 0.0
    for t in range(n):
        var += (y[t] - ybar) ** 2
    var /= max(n - 1, 1)
    prec = ybar * (1.0 - ybar) / var - 1.0 if var > 0.0 else 1.0
    coef[p + q + 1] = prec if prec > 0.1 else 0.1
    return coef


@numba.njit(cache=True, error_model="numpy")
def _gradient(coef, p, q, code, y, gy, logy, log1my):
    grad = np.zeros(coef.size)
    _loglik(coef, p, q, code, y, gy, logy, log1my, True, grad)
    return grad


@numba.njit(cache=True, error_model="numpy")
def _hessian(coef, p, q, code, y, gy, logy, log1my, rel_step):
    k = coef.size
    H = np.empty((k, k))
    for r in range(k):
        h = rel_step * (1.0 + abs(coef[r]))
        up = coef.copy()
        dn = coef.copy()
        up[r] += h
        dn[r] -= h
        gu = _gradient(up, p, q, code, y, gy, logy, log1my)
        gd = _gradient(dn, p, q, code, y, gy, logy, log1my)
        for c in range(k):
            H[c, r] = (gu[c] - gd[c]) / (2.0 * h)
    return 0.5 * (H + H.T)


# --------------------------------------------------------------------------
# public API
# --------------------------------------------------------------------------

def starting_values(order: ModelOrder, link, y) -> ParamVector:
    """OLS starting point on the link scale, with zero MA coefficients.

    Falls back to ``alpha = g(mean(y))``, zero AR coefficients and a
    moment-based precision when the regression is singular or its
    likelihood is not finite.
    """
    params, _ = _starting_values(order, link, y)
    return params


def _starting_values(order, link, y):
    y = as_series(y)
    if y.n <= order.m + order.p + 1:
        raise ValueError(f"series of length {y.n} too short for order {order}")
    code = LinkKind.parse(link).code
    gy, logy, log1my = _transform(y.values, code)
    coef, fallback = _choose_start(y.values, gy, logy, log1my, order.p, order.q, code)
    return ParamVector.from_array(coef, order), bool(fallback)


def information_matrix(order: ModelOrder, params: ParamVector, link, y,
                       rel_step: float = 1e-4) -> np.ndarray:
    """Negated numeric Hessian of the conditional log-likelihood."""
    y = as_series(y)
    code = LinkKind.parse(link).code
    gy, logy, log1my = _transform(y.values, code)
    H = _hessian(params.to_array(), order.p, order.q, code, y.values, gy, logy, log1my, rel_step)
    return -H


def _info_problems(info, names):
    try:
        cov = np.linalg.inv(info)
    except np.linalg.LinAlgError:
        return list(names)
    diag = np.diag(cov)
    return [nm for nm, v in zip(names, diag) if not (np.isfinite(v) and v > 0)]


def fit(order: ModelOrder, link, y, options: FitOptions | None = None) -> FitReport:
    """Maximize the conditional log-likelihood.

    Non-convergence is reported through ``FitReport.converged`` rather than
    raised; a non-finite likelihood at the starting point raises
    :class:`EstimationError`.
    """
    opts = options or FitOptions()
    y = as_series(y)
    link = LinkKind.parse(link)
    if y.n <= order.m + order.p + 1:
        raise ValueError(f"series of length {y.n} too short for order {order}")
    code = link.code
    fallback = False
    if opts.start is None:
        est, ll, gnorm, it, status, start = _fit_series(
            y.values, order.p, order.q, code, opts.gtol, opts.xtol, opts.maxiter)
        _, fallback = _starting_values(order, link, y)
    else:
        if opts.start.order != order:
            raise ValueError("starting point has the wrong order")
        start = opts.start.to_array()
        gy, logy, log1my = _transform(y.values, code)
        est, ll, gnorm, it, status = _optimize(
            y.values, gy, logy, log1my, order.p, order.q, code, start,
            opts.gtol, opts.xtol, opts.maxiter)
    if status == 4:
        raise EstimationError("log-likelihood is not finite at the starting values")
    converged = status in (CONVERGED_GRADIENT, CONVERGED_STEP)
    message = _STATUS_TEXT[int(status)]
    estimate = ParamVector.from_array(est, order)
    info = None
    if opts.compute_info:
        info = information_matrix(order, estimate, link, y)
        if converged:
            bad = _info_problems(info, order.coord_names())
            if bad:
                converged = False
                message = f"information matrix not invertible with positive variances ({', '.join(bad)})"
    return FitReport(
        estimate=estimate,
        loglik=float(ll),
        info_matrix=info,
        converged=bool(converged),
        iterations=int(it),
        grad_norm=float(gnorm),
        order=order,
        link=link,
        n=y.n,
        message=message,
        start_fallback=fallback,
        start=ParamVector.from_array(start, order),
    )


def asymptotic_ci(report: FitReport, level: float = 0.95) -> list[ConfidenceInterval]:
    """Wald intervals ``estimate -/+ z * sqrt(diag(K^-1))``."""
    if not report.converged:
        raise EstimationError("asymptotic intervals need a converged fit")
    if report.info_matrix is None:
        raise EstimationError("fit was run without an information matrix")
    names = report.order.coord_names()
    bad = _info_problems(report.info_matrix, names)
    if bad:
        raise EstimationError(f"information matrix singular for: {', '.join(bad)}")
    se = np.sqrt(np.diag(np.linalg.inv(report.info_matrix)))
    z = normal_quantile(0.5 + level / 2.0)
    est = report.estimate.to_array()
    return [ConfidenceInterval(e - z * s, e + z * s, level, "asymptotic", nm)
            for e, s, nm in zip(est, se, names)]
