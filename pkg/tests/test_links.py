import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import optimize, special, stats

from betarma.links import EPS, LinkKind, link, link_deriv, link_inv, normal_quantile
from betarma.special import DomainError

LINKS = list(LinkKind)
MU_GRID = np.linspace(0.001, 0.999, 999)


def test_logit_values():
    assert link("logit", 0.5) == 0.0
    assert link("logit", 0.9) == pytest.approx(math.log(9.0), abs=1e-14)
    assert link_inv("logit", 0.0) == 0.5
    assert link_inv("logit", math.log(9.0)) == pytest.approx(0.9, abs=1e-15)
    assert link_deriv("logit", 0.5) == 4.0


def test_probit_matches_bisection_oracle():
    target = optimize.brentq(lambda x: special.ndtr(x) - 0.975, 0.0, 5.0, xtol=1e-15)
    assert link("probit", 0.975) == pytest.approx(target, abs=1e-12)
    assert link("probit", 0.975) == pytest.approx(1.959964, abs=1e-6)


def test_normal_quantile_accuracy():
    p = np.concatenate([np.geomspace(1e-12, 0.02, 200), np.linspace(0.02, 0.98, 300),
                        1.0 - np.geomspace(1e-12, 0.02, 200)])
    got = np.array([normal_quantile(v) for v in p])
    assert np.max(np.abs(got - special.ndtri(p))) < 1e-10
    with pytest.raises(DomainError):
        normal_quantile(1.0)


def test_cloglog_values():
    mu = 1.0 - math.exp(-1.0)
    assert link("cloglog", mu) == pytest.approx(0.0, abs=1e-15)
    # dg/dmu = 1 / ((1 - mu) * -log(1 - mu)) = e at this point
    assert link_deriv("cloglog", mu) == pytest.approx(math.e, rel=1e-13)


@pytest.mark.parametrize("kind", LINKS)
def test_round_trip(kind):
    back = link_inv(kind, link(kind, MU_GRID))
    assert np.max(np.abs(back - MU_GRID)) < 1e-12
    mus = np.linspace(0.01, 0.99, 99)
    assert np.max(np.abs(link_inv(kind, link(kind, mus)) - mus)) < 1e-12


@pytest.mark.parametrize("kind", LINKS)
def test_derivative_matches_finite_difference(kind):
    mu = np.linspace(0.01, 0.99, 197)
    h = 1e-6
    fd = (link(kind, mu + h) - link(kind, mu - h)) / (2 * h)
    assert np.max(np.abs(link_deriv(kind, mu) - fd) / np.abs(fd)) < 1e-6


@pytest.mark.parametrize("kind", LINKS)
def test_strictly_increasing(kind):
    assert np.all(link_deriv(kind, MU_GRID) > 0)
    assert np.all(np.diff(link(kind, MU_GRID)) > 0)


@given(st.floats(0.001, 0.999), st.sampled_from(LINKS))
def test_round_trip_property(mu, kind):
    assert link_inv(kind, link(kind, mu)) == pytest.approx(mu, abs=1e-12)


@pytest.mark.parametrize("kind", LINKS)
def test_inverse_saturates_into_open_interval(kind):
    out = link_inv(kind, np.array([-1e6, -800.0, 800.0, 1e6]))
    assert np.all(out >= EPS) and np.all(out <= 1.0 - EPS)
    assert out[0] == EPS and out[-1] == 1.0 - EPS


def test_inverse_matches_reference_cdfs():
    eta = np.linspace(-7.5, 3, 106)  # probit reaches the clamp below about -7.7
    assert np.allclose(link_inv("logit", eta), special.expit(eta), rtol=1e-14, atol=0)
    assert np.allclose(link_inv("probit", eta), stats.norm.cdf(eta), rtol=1e-13, atol=0)
    assert np.allclose(link_inv("cloglog", eta), 1 - np.exp(-np.exp(eta)), rtol=1e-12, atol=0)


@pytest.mark.parametrize("fn", [link, link_deriv])
@pytest.mark.parametrize("mu", [0.0, 1.0, -0.1, 1.5])
def test_domain_errors(fn, mu):
    with pytest.raises(DomainError):
        fn("logit", mu)


def test_non_finite_eta_rejected():
    with pytest.raises(DomainError):
        link_inv("logit", float("nan"))


def test_link_kind_parse():
    assert LinkKind.parse("LOGIT") is LinkKind.LOGIT
    assert LinkKind.parse(LinkKind.PROBIT) is LinkKind.PROBIT
    with pytest.raises(ValueError, match="unknown link"):
        LinkKind.parse("log")
