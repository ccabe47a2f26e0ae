"""Parametric bootstrap for beta ARMA fits.

Pseudo-series are simulated from the fitted model and refitted from their
own OLS starting values. The replicate estimates give a bias-corrected
estimator ``2 * estimate - mean(replicates)``, bootstrap standard errors
and four interval families (normal with bootstrap SE, bootstrap-t,
percentile, and normal recentred at the corrected estimate).
"""

from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass

import numba
import numpy as np
from scipy import stats

from .estimation import (
    ConfidenceInterval,
    FitReport,
    _fit_series,
    _optimize,
)
from .links import LinkKind, normal_quantile
from .model import ModelOrder, ParamVector, _hits_clamp, _simulate, _transform, as_series
from .optim import CONVERGED_GRADIENT, CONVERGED_STEP
from .special import RngStream

__all__ = [
    "BootstrapError",
    "BootstrapResult",
    "bias_corrected",
    "ci_boot_se",
    "ci_boot_t",
    "ci_percentile",
    "ci_unbiased_centered",
    "run_bootstrap",
]

MAX_REPLICATES = 10_000
_PERTURB_SCALE = 0.1


class BootstrapError(RuntimeError):
    pass


@dataclass
class BootstrapResult:
    replicates: np.ndarray  # (B_eff, k), converged refits only
    mean_star: np.ndarray
    corrected: ParamVector
    se_boot: np.ndarray
    n_failed: int
    estimate: np.ndarray
    order: ModelOrder
    n: int
    floored: bool = False

    @property
    def B(self) -> int:
        """Effective number of replicates."""
        return self.replicates.shape[0]

    def to_dict(self, include_replicates: bool = True) -> dict:
        c = self.corrected
        out = {
            "p": self.order.p,
            "q": self.order.q,
            "n": self.n,
            "B": self.B,
            "n_failed": self.n_failed,
            "estimate": self.estimate.tolist(),
            "mean_star": self.mean_star.tolist(),
            "corrected": {"alpha": c.alpha, "ar": list(c.ar), "ma": list(c.ma),
                          "precision": c.precision},
            "corrected_floored": self.floored,
            "se_boot": self.se_boot.tolist(),
            "replicates_elided": not include_replicates,
        }
        if include_replicates:
            out["replicates"] = self.replicates.tolist()
        return out

    def to_json(self, include_replicates: bool = True, **kw) -> str:
        return json.dumps(self.to_dict(include_replicates), **kw)


@numba.njit(cache=True, error_model="numpy")
def _replicate(gen, coef, p, q, code, n, burn_in, gtol, xtol, maxiter):
    """Simulate one pseudo-series and refit; one perturbed retry on failure."""
    y = _simulate(gen, coef, p, q, code, n, burn_in)
    if _hits_clamp(y):
        return np.full(coef.size, np.nan), False
    est, ll, gnorm, it, status, start = _fit_series(y, p, q, code, gtol, xtol, maxiter)
    if status == CONVERGED_GRADIENT or status == CONVERGED_STEP:
        return est, True
    return _retry(gen, y, start, p, q, code, gtol, xtol, maxiter)


@numba.njit(cache=True, error_model="numpy")
def _retry(gen, y, start, p, q, code, gtol, xtol, maxiter):
    k = start.size
    x0 = start.copy()
    for c in range(k - 1):
        x0[c] += _PERTURB_SCALE * (1.0 + abs(start[c])) * gen.standard_normal()
    x0[k - 1] = start[k - 1] * math.exp(_PERTURB_SCALE * gen.standard_normal())
    gy, logy, log1my = _transform(y, code)
    est, ll, gnorm, it, status = _optimize(y, gy, logy, log1my, p, q, code, x0, gtol, xtol, maxiter)
    return est, (status == CONVERGED_GRADIENT or status == CONVERGED_STEP)


def _refit_given(y, order, code, gen, gtol, xtol, maxiter):
    if _hits_clamp(y):
        return np.full(order.k, np.nan), False
    est, ll, gnorm, it, status, start = _fit_series(y, order.p, order.q, code, gtol, xtol, maxiter)
    if status in (CONVERGED_GRADIENT, CONVERGED_STEP):
        return est, True
    return _retry(gen, y, start, order.p, order.q, code, gtol, xtol, maxiter)


def run_bootstrap(order: ModelOrder, link, y, fit: FitReport, B: int, rng: RngStream,
                  simulator=None, burn_in: int | None = None,
                  gtol: float = 1e-6, xtol: float = 1e-9, maxiter: int = 500) -> BootstrapResult:
    """Parametric bootstrap of ``fit``.

    Replicate ``b`` draws from ``rng.substream(b)`` only, so results do not
    depend on evaluation order. ``simulator(order, params, link, n, rng)``
    can replace the model simulator. Failed refits are retried once from a
    perturbed start and then dropped; pseudo-series that collapse onto the
    numerical clamp count as failures without a refit. More than ``B / 2``
    failures raise :class:`BootstrapError`.
    """
    if not fit.converged:
        raise BootstrapError("bootstrap needs a converged fit")
    if not 2 <= B <= MAX_REPLICATES:
        raise ValueError(f"B must lie in [2, {MAX_REPLICATES}]")
    y = as_series(y)
    link = LinkKind.parse(link)
    code = link.code
    n = y.n
    if burn_in is None:
        burn_in = 100 + order.m
    coef = fit.estimate.to_array()
    reps = np.empty((B, order.k))
    ok = np.zeros(B, dtype=bool)
    for b in range(B):
        sub = rng.substream(b)
        if simulator is None:
            est, good = _replicate(sub.generator, coef, order.p, order.q, code, n, burn_in,
                                   gtol, xtol, maxiter)
        else:
            series = as_series(simulator(order, fit.estimate, link, n, sub))
            est, good = _refit_given(series.values, order, code, sub.generator, gtol, xtol, maxiter)
        reps[b] = est
        ok[b] = good
    n_failed = int(B - ok.sum())
    if n_failed > B / 2:
        raise BootstrapError(f"{n_failed} of {B} bootstrap refits failed")
    return summarize(reps[ok], coef, order, n, n_failed)


def summarize(replicates, estimate, order: ModelOrder, n: int, n_failed: int = 0) -> BootstrapResult:
    """Aggregate replicate estimates into a :class:`BootstrapResult`."""
    replicates = np.asarray(replicates, dtype=float)
    estimate = np.asarray(estimate, dtype=float)
    if replicates.ndim != 2 or replicates.shape[0] < 2:
        raise BootstrapError("need at least two converged replicates")
    mean_star = replicates.mean(axis=0)
    se = replicates.std(axis=0, ddof=1)
    corrected, floored = _correct(estimate, mean_star, order)
    return BootstrapResult(replicates, mean_star, corrected, se, n_failed, estimate,
                           order, n, floored)


def _correct(estimate, mean_star, order):
    vals = 2.0 * estimate - mean_star
    floored = False
    if not vals[-1] > 0:
        vals[-1] = np.finfo(float).tiny
        floored = True
    return ParamVector.from_array(vals, order), floored


def bias_corrected(fit: FitReport, boot: BootstrapResult) -> ParamVector:
    """``2 * estimate - mean_star``; a non-positive precision is floored."""
    params, floored = _correct(fit.estimate.to_array(), boot.mean_star, fit.order)
    if floored:
        warnings.warn("bias-corrected precision was not positive and has been floored",
                      RuntimeWarning, stacklevel=2)
    return params


def _z(level):
    return normal_quantile(0.5 + level / 2.0)


def _normal_intervals(center, se, mult, level, kind, names):
    return [ConfidenceInterval(c - mult * s, c + mult * s, level, kind, nm)
            for c, s, nm in zip(center, se, names)]


def ci_boot_se(fit: FitReport, boot: BootstrapResult, level: float = 0.95) -> list[ConfidenceInterval]:
    return _normal_intervals(fit.estimate.to_array(), boot.se_boot, _z(level), level,
                             "boot_se", fit.order.coord_names())


def t_multiplier(level: float, df: int) -> float:
    if df <= 0:
        raise BootstrapError(f"bootstrap-t needs positive degrees of freedom, got {df}")
    return float(stats.t.ppf(0.5 + level / 2.0, df))


def ci_boot_t(fit: FitReport, boot: BootstrapResult, level: float = 0.95,
              df: int | None = None) -> list[ConfidenceInterval]:
    """Bootstrap SE with a Student-t multiplier, ``df = n - k`` by default."""
    if df is None:
        df = boot.n - fit.order.k
    return _normal_intervals(fit.estimate.to_array(), boot.se_boot, t_multiplier(level, df),
                             level, "boot_t", fit.order.coord_names())


def percentile_ranks(B: int, level: float) -> tuple[int, int]:
    """1-based order-statistic ranks ``ceil(B a/2)`` and ``ceil(B (1 - a/2))``."""
    half = (1.0 - level) / 2.0
    lo = B * half
    if lo < 1.0 - 1e-9:
        raise BootstrapError(f"B = {B} too small for a {level:.0%} percentile interval")
    # tolerance absorbs representation error in 1 - level
    return math.ceil(lo - 1e-9), math.ceil(B * (1.0 - half) - 1e-9)


def ci_percentile(boot: BootstrapResult, level: float = 0.95) -> list[ConfidenceInterval]:
    lo, hi = percentile_ranks(boot.B, level)
    srt = np.sort(boot.replicates, axis=0)
    return [ConfidenceInterval(srt[lo - 1, r], srt[hi - 1, r], level, "percentile", nm)
            for r, nm in enumerate(boot.order.coord_names())]


def ci_unbiased_centered(fit: FitReport, boot: BootstrapResult,
                         level: float = 0.95) -> list[ConfidenceInterval]:
    center = 2.0 * fit.estimate.to_array() - boot.mean_star
    return _normal_intervals(center, boot.se_boot, _z(level), level,
                             "unbiased_centered", fit.order.coord_names())
