import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

import betarma.diagnostics as dg
from betarma.diagnostics import (
    GridCell,
    sample_acf,
    sample_pacf,
    select_order,
    standardized_residuals,
)
from betarma.estimation import EstimationError, FitReport, fit
from betarma.links import LinkKind
from betarma.model import MeanPath, ModelOrder, ParamVector, mean_recursion, simulate
from betarma.special import RngStream


def _acf_loops(x, max_lag):
    n = len(x)
    xbar = sum(x) / n
    denom = sum((v - xbar) ** 2 for v in x)
    out = []
    for lag in range(1, max_lag + 1):
        num = 0.0
        for t in range(lag, n):
            num += (x[t] - xbar) * (x[t - lag] - xbar)
        out.append(num / denom)
    return np.array(out)


def _pacf_yule_walker(x, max_lag):
    rho = np.concatenate(([1.0], _acf_loops(list(x), max_lag)))
    out = []
    for k in range(1, max_lag + 1):
        R = np.array([[rho[abs(i - j)] for j in range(k)] for i in range(k)])
        out.append(np.linalg.solve(R, rho[1:k + 1])[-1])
    return np.array(out)


finite = st.floats(-1e3, 1e3, allow_nan=False, allow_infinity=False)


@given(arrays(float, st.integers(25, 80), elements=finite), st.integers(1, 20))
def test_acf_matches_double_loop(x, max_lag):
    if np.ptp(x) < 1e-3:
        return
    np.testing.assert_allclose(sample_acf(x, max_lag), _acf_loops(list(x), max_lag), rtol=0, atol=1e-12)


@pytest.mark.parametrize("seed", range(5))
def test_pacf_matches_yule_walker_solves(seed):
    rng = np.random.default_rng(seed)
    e = rng.standard_normal(400)
    x = np.convolve(e, [1.0, 0.6, -0.3], mode="valid")
    np.testing.assert_allclose(sample_pacf(x, 20), _pacf_yule_walker(x, 20), rtol=0, atol=1e-10)


@given(arrays(float, st.integers(5, 50), elements=finite), st.integers(1, 4))
def test_pacf_lag_one_equals_acf_lag_one(x, max_lag):
    if np.ptp(x) < 1e-3:
        return
    assert sample_pacf(x, max_lag)[0] == sample_acf(x, max_lag)[0]


def test_acf_alternating_series():
    for n in (10, 100, 1000):
        x = np.tile([1.0, -1.0], n // 2)
        assert sample_acf(x, 1)[0] == pytest.approx(-(n - 1) / n, abs=1e-15)


def test_acf_white_noise_band():
    n = 10_000
    inside = []
    for seed in range(20):
        x = np.random.default_rng(seed).standard_normal(n)
        inside.append(np.all(np.abs(sample_acf(x, 20)) < 4 / math.sqrt(n)))
    assert np.mean(inside) >= 0.95


def test_pacf_of_ar1():
    rng = np.random.default_rng(1)
    n = 10_000
    x = np.zeros(n)
    e = rng.standard_normal(n)
    for t in range(1, n):
        x[t] = 0.7 * x[t - 1] + e[t]
    pacf = sample_pacf(x, 10)
    assert pacf[0] == pytest.approx(sample_acf(x, 1)[0], abs=1e-15)
    assert pacf[0] == pytest.approx(0.7, abs=0.03)
    assert np.all(np.abs(pacf[1:]) < 4 / math.sqrt(n))


def test_acf_errors():
    with pytest.raises(ValueError, match="constant"):
        sample_acf(np.full(10, 0.3), 2)
    with pytest.raises(ValueError):
        sample_acf(np.arange(5.0), 5)
    with pytest.raises(ValueError):
        sample_pacf(np.arange(5.0), 0)


def _report(order, estimate, converged=True):
    return FitReport(estimate, 0.0, None, converged, 0, 0.0, order, LinkKind.LOGIT, 10)


def test_standardized_residual_arithmetic():
    order = ModelOrder(1, 0)
    path = MeanPath(np.array([np.nan, 0.5]), np.array([0.0, 0.25]), 1, False)
    z = standardized_residuals(_report(order, ParamVector(0.0, (0.1,), (), 3.0)), path)
    assert z.shape == (1,)
    assert z[0] == pytest.approx(0.25 / math.sqrt(0.25 / 4.0), abs=1e-15)


def test_standardized_residuals_vanish_when_fit_is_exact():
    order = ModelOrder(0, 1)
    path = MeanPath(np.array([np.nan, 0.3, 0.6]), np.zeros(3), 1, False)
    z = standardized_residuals(_report(order, ParamVector(0.0, (), (0.2,), 10.0)), path)
    np.testing.assert_array_equal(z, np.zeros(2))


def test_standardized_residuals_need_convergence():
    order = ModelOrder(1, 0)
    path = MeanPath(np.array([np.nan, 0.5]), np.array([0.0, 0.1]), 1, False)
    with pytest.raises(EstimationError):
        standardized_residuals(_report(order, ParamVector(0.0, (0.1,), (), 3.0), False), path)


def test_standardized_residuals_on_well_specified_fit():
    order = ModelOrder(1, 1)
    truth = ParamVector(-0.5, (0.5,), (1.0,), 20.0)
    y = simulate(order, truth, "logit", 500, rng=RngStream(8))
    rep = fit(order, "logit", y)
    z = standardized_residuals(rep, mean_recursion(order, rep.estimate, "logit", y))
    assert z.size == 499
    assert np.mean(np.abs(z) >= 3) < 0.01


def test_aic_formula():
    order = ModelOrder(1, 1)
    y = simulate(order, ParamVector(-0.5, (0.5,), (1.0,), 20.0), "logit", 80, rng=RngStream(1))
    rep = fit(order, "logit", y)
    assert rep.aic == -2.0 * rep.loglik + 2.0 * (1 + 1 + 2)


def test_select_order_recovers_strong_arma11():
    # A large MA coefficient makes the MA term identifiable at n = 300.
    order = ModelOrder(1, 1)
    truth = ParamVector(0.0, (0.5,), (2.0,), 50.0)
    hits = 0
    for r in range(100):
        y = simulate(order, truth, "logit", 300, rng=RngStream(11).substream(r))
        hits += select_order("logit", y, 2, 2).best == order
    assert hits >= 80


def test_select_order_grid_and_best():
    order = ModelOrder(1, 0)
    y = simulate(order, ParamVector(1.0, (-0.5,), (), 20.0), "logit", 60, rng=RngStream(4))
    res = select_order("logit", y, 1, 1)
    assert [(c.p, c.q) for c in res.grid] == [(0, 1), (1, 0), (1, 1)]
    conv = [c for c in res.grid if c.converged]
    assert res.best_fit.aic == min(c.aic for c in conv)
    assert (res.best.p, res.best.q) in [(c.p, c.q) for c in conv if c.aic == res.best_fit.aic]
    assert res.grid_rows()[0][:2] == (0, 1)


class _FakeReport:
    def __init__(self, order, aic, converged=True):
        self.order, self.aic, self.converged = order, aic, converged


def test_select_order_tie_breaks_toward_parsimony(monkeypatch):
    aics = {(1, 0): 5.0, (0, 1): 5.0, (1, 1): 5.0, (2, 0): 5.0, (2, 1): 9.0}
    monkeypatch.setattr(dg, "fit", lambda order, link, y, options=None: _FakeReport(order, aics[(order.p, order.q)]))
    res = select_order("logit", [0.5] * 10, 2, 1)
    assert res.best == ModelOrder(1, 0)
    res = select_order("logit", [0.5] * 10, 1, 1)
    assert res.best == ModelOrder(1, 0)
    aics[(1, 0)] = 6.0
    assert select_order("logit", [0.5] * 10, 1, 1).best == ModelOrder(0, 1)


def test_select_order_skips_non_converged(monkeypatch):
    def fake(order, link, y, options=None):
        if order == ModelOrder(0, 1):
            raise EstimationError("boom")
        return _FakeReport(order, 1.0 if order == ModelOrder(1, 1) else 3.0, order != ModelOrder(1, 1))
    monkeypatch.setattr(dg, "fit", fake)
    res = select_order("logit", [0.5] * 10, 1, 1)
    assert res.best == ModelOrder(1, 0)
    assert GridCell(0, 1, math.nan, False).converged is False
    cells = {(c.p, c.q): c for c in res.grid}
    assert not cells[(0, 1)].converged and math.isnan(cells[(0, 1)].aic)
    assert not cells[(1, 1)].converged


def test_select_order_errors(monkeypatch):
    with pytest.raises(ValueError):
        select_order("logit", [0.5] * 10, 0, 0)
    monkeypatch.setattr(dg, "fit", lambda order, link, y, options=None: _FakeReport(order, 1.0, False))
    with pytest.raises(EstimationError):
        select_order("logit", [0.5] * 10, 1, 1)


def test_select_order_is_deterministic():
    y = simulate(ModelOrder(1, 1), ParamVector(-0.5, (0.5,), (1.0,), 20.0), "logit", 80, rng=RngStream(6))
    a, b = select_order("logit", y, 2, 2), select_order("logit", y, 2, 2)
    assert repr(a.grid_rows()) == repr(b.grid_rows())
    assert a.best == b.best
