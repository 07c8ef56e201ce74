import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mlkcalc.errors import DomainError, ValidationError
from mlkcalc.funcmodel import Grid, PowerSum, SmoothFn, sample
from mlkcalc.rl_ops import caputo_derivative, rl_derivative, rl_integral, rl_integral_grid, rl_integral_power

from oracles import rl_integral_quad


def test_power_rule_against_quadrature():
    f = PowerSum(((1.0, 0.5), (2.0, 2.0)))
    out = rl_integral_power(f, 0.3)
    for t in (0.4, 1.7):
        assert out(t) == pytest.approx(rl_integral_quad(lambda x: x**0.5 + 2 * x**2, 0.3, t), rel=1e-12)


@settings(max_examples=40, deadline=None)
@given(a=st.floats(0.05, 1.5), b=st.floats(0.05, 1.5), e=st.floats(0.0, 3.0))
def test_integral_semigroup(a, b, e):
    f = PowerSum.monomial(e)
    lhs = rl_integral(rl_integral(f, a), b)
    rhs = rl_integral(f, a + b)
    t = np.array([0.3, 1.0, 2.0])
    np.testing.assert_allclose(lhs(t), rhs(t), rtol=1e-12)


def test_derivative_annihilates_kernel_power():
    # D^alpha t**(alpha-1) = 0
    f = PowerSum.monomial(-0.6)
    assert rl_derivative(f, 0.4).is_zero() or np.allclose(rl_derivative(f, 0.4)(np.array([0.5, 1.0])), 0.0)


def test_derivative_inverts_integral():
    f = PowerSum(((1.0, 1.0), (0.5, 2.5)))
    t = np.linspace(0.1, 2, 7)
    np.testing.assert_allclose(rl_derivative(rl_integral(f, 0.35), 0.35)(t), f(t), rtol=1e-12)


@pytest.mark.parametrize("mu", [0.25, 0.5, 0.9])
def test_grid_integral_converges_second_order(mu):
    f = SmoothFn.exp()
    exact = rl_integral_power(PowerSum.exp_taylor(), mu)
    errs = []
    for n in (129, 257, 513):
        g = Grid(0.0, 2.0, n)
        errs.append(np.max(np.abs(rl_integral_grid(sample(f, g), mu).values - exact(g.t))))
    orders = np.log2(np.array(errs[:-1]) / np.array(errs[1:]))
    assert np.all(orders > 1.8)
    assert errs[-1] < 1e-5


@pytest.mark.parametrize("scheme,expected", [("corrected", 1e-7), ("trapezoid", 1e-5), ("l1", 1e-3)])
def test_grid_derivative_schemes(scheme, expected):
    g = Grid(0.0, 2.0, 1025)
    f = sample(PowerSum.exp_taylor(), g)
    exact = rl_derivative(PowerSum.exp_taylor(), 0.5)
    out = rl_derivative(f, 0.5, scheme=scheme)
    assert out.singular_at_base
    assert np.isnan(out.values[0])
    assert out.max_abs() > 0
    err = np.max(np.abs(out.values[1:] - exact(g.t[1:]))[g.t[1:] >= 0.1])
    assert err < expected


def test_caputo_vs_rl():
    f = PowerSum(((3.0, 0.0), (1.0, 2.0)))
    t = np.linspace(0.2, 2, 5)
    alpha = 0.4
    cap = caputo_derivative(f, alpha)
    rl = rl_derivative(f, alpha)
    np.testing.assert_allclose(rl(t) - cap(t), 3.0 * t ** (-alpha) / math.gamma(1 - alpha), rtol=1e-12)
    g = Grid(0.0, 2.0, 513)
    grid = caputo_derivative(SmoothFn.exp(), alpha, g)
    exact = caputo_derivative(PowerSum.exp_taylor(), alpha)
    assert np.max(np.abs(grid.values - exact(g.t))) < 1e-6


def test_rl_validation():
    with pytest.raises(DomainError):
        rl_derivative(PowerSum.monomial(1.0), 1.2)
    with pytest.raises(ValidationError):
        rl_integral(lambda t: t, 0.5)
    with pytest.raises(ValidationError):
        rl_derivative(sample(PowerSum.monomial(1.0), Grid(0, 1, 9)), 0.5, scheme="bogus")
