import math

import numpy as np
import pytest

from betarma.model import ParamVector, _transform, simulate
from betarma.optim import (
    BAD_START,
    CONVERGED_GRADIENT,
    CONVERGED_STEP,
    MAX_ITER,
    minimize,
    negloglik,
)
from betarma.special import RngStream


def _args(pv, n=150, seed=0):
    y = simulate(pv.order, pv, "logit", n, rng=RngStream(seed)).values
    gy, logy, log1my = _transform(y, 0)
    return (y, gy, logy, log1my, pv.order.p, pv.order.q, 0)


def test_negloglik_log_scale_gradient():
    pv = ParamVector(-0.5, (0.5,), (1.0,), 20.0)
    args = _args(pv)
    x = np.array([-0.4, 0.45, 0.8, math.log(18.0)])
    f, g = negloglik(x, args)
    for r in range(x.size):
        h = 1e-6
        up, dn = x.copy(), x.copy()
        up[r] += h
        dn[r] -= h
        fd = (negloglik(up, args)[0] - negloglik(dn, args)[0]) / (2 * h)
        assert g[r] == pytest.approx(fd, rel=1e-5, abs=1e-6)


def test_negloglik_rejects_extreme_precision():
    args = _args(ParamVector(1.0, (-0.5,), (), 20.0))
    f, _ = negloglik(np.array([1.0, -0.5, -30.0]), args)
    assert f == np.inf


def test_minimize_statuses():
    pv = ParamVector(1.0, (-0.5,), (), 20.0)
    args = _args(pv)
    res = minimize(np.array([0.5, 0.0, math.log(5.0)]), args)
    assert res.status in (CONVERGED_GRADIENT, CONVERGED_STEP) and res.converged
    assert np.max(np.abs(res.grad)) < 1e-6 * (1 + abs(res.fun)) or res.status == CONVERGED_STEP
    capped = minimize(np.array([0.5, 0.0, math.log(5.0)]), args, maxiter=1)
    assert capped.status == MAX_ITER and not capped.converged
    bad = minimize(np.array([90.0, 0.0, math.log(5.0)]), args)
    assert bad.status == BAD_START


def test_minimize_deterministic():
    args = _args(ParamVector(-0.5, (0.5,), (1.0,), 20.0), seed=3)
    x0 = np.array([0.0, 0.0, 0.0, math.log(10.0)])
    a = minimize(x0, args)
    b = minimize(x0, args)
    assert np.array_equal(a.x, b.x) and a.iterations == b.iterations
