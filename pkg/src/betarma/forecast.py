"""Out-of-sample mean forecasts and forecast accuracy measures."""

from __future__ import annotations

from dataclasses import dataclass

import numba
import numpy as np

from .links import LinkKind, _link, _link_inv
from .model import MeanPath, ModelOrder, ParamVector, as_series

__all__ = ["ForecastPath", "accuracy", "forecast"]


@dataclass(frozen=True)
class ForecastPath:
    horizon: int
    mu_hat: np.ndarray

    def __post_init__(self):
        mu = np.asarray(self.mu_hat, dtype=float)
        if mu.shape != (self.horizon,):
            raise ValueError("mu_hat must have one entry per horizon step")
        if not np.all((mu > 0) & (mu < 1)):
            raise ValueError("forecast means must lie in (0, 1)")
        object.__setattr__(self, "mu_hat", mu)

    def to_dict(self) -> dict:
        return {"horizon": self.horizon, "mu_hat": self.mu_hat.tolist()}


@numba.njit(cache=True, error_model="numpy")
def _forecast(coef, p, q, code, y, resid, H):
    n = y.size
    gext = np.empty(n + H)
    rext = np.zeros(n + H)
    for t in range(n):
        gext[t] = _link(code, y[t])
        rext[t] = resid[t]
    out = np.empty(H)
    for h in range(H):
        t = n + h
        eta = coef[0]
        for i in range(p):
            eta += coef[1 + i] * gext[t - 1 - i]
        for j in range(q):
            eta += coef[1 + p + j] * rext[t - 1 - j]
        mt = _link_inv(code, eta)
        out[h] = mt
        # unobserved y is replaced by its forecast; future residuals stay 0
        gext[t] = _link(code, mt)
    return out


def forecast(order: ModelOrder, params: ParamVector, link, y, path: MeanPath, H: int) -> ForecastPath:
    """Recursive ``H``-step mean forecasts from the end of ``y``.

    Lagged responses beyond the sample are replaced by their own forecasts
    on the link scale, residuals beyond the sample are zero, and in-sample
    residuals come from ``path``.

    Examples
    --------
    >>> from betarma import ModelOrder, ParamVector, mean_recursion
    >>> order = ModelOrder(0, 1)
    >>> par = ParamVector(0.0, (), (0.5,), 30.0)
    >>> y = [0.4, 0.6, 0.55, 0.45]
    >>> fc = forecast(order, par, "logit", y, mean_recursion(order, par, "logit", y), 3)
    >>> float(fc.mu_hat[2])
    0.5
    """
    if H < 1:
        raise ValueError("horizon must be at least 1")
    if params.order != order:
        raise ValueError(f"parameter vector has order {params.order}, expected {order}")
    y = as_series(y)
    if path.resid.shape != (y.n,):
        raise ValueError("mean path does not match the series")
    code = LinkKind.parse(link).code
    mu = _forecast(params.to_array(), order.p, order.q, code, y.values,
                   np.ascontiguousarray(path.resid, dtype=float), int(H))
    return ForecastPath(int(H), mu)


def accuracy(observed, predicted) -> tuple[float, float, float]:
    """Return ``(mse, mape, mase)`` over a forecast window.

    MASE scales the mean absolute error by ``D``, the mean absolute first
    difference of ``observed`` across the window.

    Raises
    ------
    ValueError
        If the window is shorter than 2, an observed value is zero (MAPE),
        or the observed path is constant (``D = 0``).
    """
    obs = np.asarray(observed, dtype=float)
    pred = np.asarray(predicted, dtype=float)
    if obs.ndim != 1 or obs.shape != pred.shape:
        raise ValueError("observed and predicted must be 1-d arrays of equal length")
    if obs.size < 2:
        raise ValueError("accuracy needs at least two forecast points")
    if np.any(obs == 0):
        raise ValueError("MAPE is undefined when an observed value is zero")
    err = obs - pred
    d = np.mean(np.abs(np.diff(obs)))
    if d == 0:
        raise ValueError("MASE is undefined for a constant observed path")
    mse = float(np.mean(err ** 2))
    mape = float(np.mean(np.abs(err) / np.abs(obs)))
    mase = float(np.mean(np.abs(err)) / d)
    return mse, mape, mase
