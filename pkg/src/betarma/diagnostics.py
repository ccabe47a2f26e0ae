"""Residual diagnostics and AIC order selection."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .estimation import EstimationError, FitOptions, FitReport, fit
from .links import LinkKind
from .model import MeanPath, ModelOrder, as_series

__all__ = [
    "GridCell",
    "OrderSearchResult",
    "sample_acf",
    "sample_pacf",
    "select_order",
    "standardized_residuals",
]


def standardized_residuals(fit: FitReport, path: MeanPath) -> np.ndarray:
    """Residuals divided by the conditional standard deviation.

    Entry ``t - m`` is ``(y_t - mu_t) / sqrt(mu_t (1 - mu_t) / (1 + precision))``
    for ``t = m, ..., n - 1``.
    """
    if not fit.converged:
        raise EstimationError("standardized residuals need a converged fit")
    m = path.m
    mu = path.mu[m:]
    sd = np.sqrt(mu * (1.0 - mu) / (1.0 + fit.estimate.precision))
    return path.resid[m:] / sd


def _centered(x, max_lag):
    x = np.asarray(x, dtype=float)
    if x.ndim != 1:
        raise ValueError("expected a 1-d series")
    if not 1 <= max_lag < x.size:
        raise ValueError(f"need 1 <= max_lag < len(x), got max_lag={max_lag}, len={x.size}")
    # test constancy directly: x - mean(x) need not round to exact zeros
    if np.all(x == x[0]):
        raise ValueError("autocorrelations are undefined for a constant series")
    xc = x - x.mean()
    return xc, xc @ xc


def sample_acf(x, max_lag: int) -> np.ndarray:
    """Sample autocorrelations at lags ``1..max_lag`` (biased denominator)."""
    xc, denom = _centered(x, max_lag)
    return np.array([xc[lag:] @ xc[:-lag] for lag in range(1, max_lag + 1)]) / denom


def sample_pacf(x, max_lag: int) -> np.ndarray:
    """Sample partial autocorrelations by the Durbin-Levinson recursion."""
    rho = np.concatenate(([1.0], sample_acf(x, max_lag)))
    out = np.empty(max_lag)
    phi = np.zeros(0)
    for k in range(1, max_lag + 1):
        num = rho[k] - phi @ rho[k - 1:0:-1]
        den = 1.0 - phi @ rho[1:k]
        a = num / den
        phi = np.concatenate((phi - a * phi[::-1], [a]))
        out[k - 1] = a
    return out


@dataclass(frozen=True)
class GridCell:
    p: int
    q: int
    aic: float
    converged: bool


@dataclass
class OrderSearchResult:
    grid: list[GridCell]
    best: ModelOrder
    best_fit: FitReport

    def grid_rows(self) -> list[tuple]:
        return [(c.p, c.q, c.aic, c.converged) for c in self.grid]


def select_order(link, y, p_max: int, q_max: int,
                 options: FitOptions | None = None) -> OrderSearchResult:
    """Fit every ``(p, q)`` with ``p <= p_max``, ``q <= q_max`` and keep the
    lowest AIC.

    Cells that fail to converge (or whose series is too short) are recorded
    with ``converged=False`` and skipped. Ties go to the smaller ``p + q``,
    then the smaller ``q``.
    """
    if p_max < 0 or q_max < 0 or p_max + q_max < 1:
        raise ValueError("p_max and q_max must be non-negative and not both zero")
    y = as_series(y)
    link = LinkKind.parse(link)
    grid = []
    best_key = None
    best = None
    for p in range(p_max + 1):
        for q in range(q_max + 1):
            if p + q == 0:
                continue
            order = ModelOrder(p, q)
            try:
                rep = fit(order, link, y, options)
            except (ValueError, EstimationError):
                grid.append(GridCell(p, q, math.nan, False))
                continue
            aic = rep.aic if rep.converged else math.nan
            grid.append(GridCell(p, q, aic, rep.converged))
            if not rep.converged:
                continue
            key = (aic, p + q, q)
            if best_key is None or key < best_key:
                best_key, best = key, rep
    if best is None:
        raise EstimationError("no order in the search grid converged")
    return OrderSearchResult(grid, best.order, best)
