import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mlkcalc.errors import DomainError, NoConvergence, PoleError
from mlkcalc.specialfn import (
    gamma,
    log_gamma,
    miller_ross,
    mittag_leffler,
    mittag_leffler_kernel_dt,
    ml_series,
    recip_gamma,
)

from oracles import ml as ml_oracle


@pytest.mark.parametrize("x", [0.1, 0.5, 1.0, 2.5, 7.3, 30.0, 150.0, -0.5, -2.7, -10.2])
def test_gamma_matches_mpmath(x):
    assert gamma(x) == pytest.approx(float(mp.gamma(x)), rel=1e-13)


def test_gamma_poles_and_recip():
    with pytest.raises(PoleError):
        gamma(-3.0)
    assert recip_gamma(-3.0) == 0.0
    assert recip_gamma(0.0) == 0.0
    assert recip_gamma(200.0) == pytest.approx(float(mp.rgamma(200)), rel=1e-12)


def test_gamma_overflow():
    with pytest.raises(OverflowError):
        gamma(200.0)


def test_log_gamma():
    for x in (0.01, 0.3, 4.0, 1e3):
        assert log_gamma(x) == pytest.approx(float(mp.loggamma(x)), rel=1e-13)
    with pytest.raises(DomainError):
        log_gamma(-1.0)


def _budget(alpha, beta, z, ulps=64):
    """Rounding budget of the direct sum: a few ulps of the sum of |terms|, E(|z|)."""
    return ulps * np.finfo(float).eps * np.maximum(ml_series(alpha, beta, np.abs(z)), 1.0)


def test_ml_known_closed_forms():
    z = np.linspace(-3, 3, 13)
    np.testing.assert_allclose(ml_series(1.0, 1.0, z), np.exp(z), rtol=1e-12)  # alternating terms cancel for z < 0
    np.testing.assert_allclose(ml_series(2.0, 1.0, z[z > 0]), np.cosh(np.sqrt(z[z > 0])), rtol=1e-14)
    half = np.array([float(mp.exp(x * x) * mp.erfc(-x)) for x in z])
    assert np.all(np.abs(ml_series(0.5, 1.0, z) - half) <= _budget(0.5, 1.0, z))


@pytest.mark.parametrize("alpha,beta", [(0.3, 1.0), (0.5, 0.5), (0.7, 1.7), (0.9, 2.0)])
@pytest.mark.parametrize("z", [-8.0, -2.5, -0.3, 0.0, 0.4, 3.0])
def test_ml_against_oracle(alpha, beta, z):
    assert ml_series(alpha, beta, z) == pytest.approx(ml_oracle(alpha, beta, z), rel=1e-10, abs=1e-14)


@pytest.mark.parametrize("alpha", [0.3, 0.6, 0.9])
def test_ml_stiff_negative_arguments(alpha):
    # large negative arguments go through the contour path; compare to the asymptotic oracle at 40 digits
    for z in (-20.0, -45.0):
        # E_alpha(-x**alpha) is the inverse Laplace transform of s**(alpha-1)/(s**alpha+1)
        x = (-z) ** (1.0 / alpha)
        with mp.workdps(60):
            ref = float(mp.invertlaplace(lambda s: s ** (alpha - 1) / (s**alpha + 1), x, method="talbot"))
        assert mittag_leffler(alpha, z) == pytest.approx(ref, rel=1e-8, abs=1e-12)


def test_mittag_leffler_limits():
    with pytest.raises(NoConvergence):
        mittag_leffler(0.5, -60.0)
    with pytest.raises(DomainError):
        mittag_leffler(1.5, 1.0)
    assert mittag_leffler(0.4, 0.0) == pytest.approx(1.0, abs=4e-16)


@settings(max_examples=60, deadline=None)
@given(
    alpha=st.floats(0.2, 1.0),
    beta=st.floats(0.2, 2.0),
    z=st.floats(-4.0, 2.0),  # E_alpha(z) ~ exp(z**(1/alpha)) overflows beyond
)
def test_ml_recurrence(alpha, beta, z):
    # E_{a,b}(z) = 1/Gamma(b) + z E_{a,a+b}(z)
    lhs = ml_series(alpha, beta, z)
    rhs = recip_gamma(beta) + z * ml_series(alpha, alpha + beta, z)
    budget = _budget(alpha, beta, z) + abs(z) * _budget(alpha, alpha + beta, z)
    assert abs(lhs - rhs) <= budget


def test_kernel_derivative_by_differences():
    alpha, c, u, h = 0.6, -1.5, 0.8, 1e-5
    fd = (mittag_leffler(alpha, c * (u + h) ** alpha) - mittag_leffler(alpha, c * (u - h) ** alpha)) / (2 * h)
    assert mittag_leffler_kernel_dt(alpha, c, u) == pytest.approx(fd, rel=1e-8)
    with pytest.raises(DomainError):
        mittag_leffler_kernel_dt(alpha, c, 0.0)


@pytest.mark.parametrize("nu,a,t", [(0.5, 1.0, 1.3), (-1 / 3, -7.0, 0.9), (-2 / 3, 2.0, 0.4), (0.0, -40.0, 2.0)])
def test_miller_ross_against_mpmath(nu, a, t):
    ref = mp.mpf(t) ** nu * mp.nsum(lambda n: (mp.mpf(a) * t) ** n * mp.rgamma(nu + n + 1), [0, mp.inf])
    assert miller_ross(nu, a, t) == pytest.approx(float(ref), rel=1e-10)


def test_miller_ross_integer_order_is_exponential():
    t = np.array([0.5, 1.0, 2.0])
    np.testing.assert_allclose(miller_ross(0.0, 1.5, t), np.exp(1.5 * t), rtol=1e-14)
    with pytest.raises(DomainError):
        miller_ross(0.5, 1.0, 0.0)
