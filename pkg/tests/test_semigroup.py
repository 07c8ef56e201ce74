import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mlkcalc.ab_ops import ExponentialNorm, NormalizationWarning
from mlkcalc.errors import DomainError, ValidationError
from mlkcalc.funcmodel import Grid, PowerSum
from mlkcalc.semigroup import (
    SemigroupCase,
    fde_residual,
    fie_residual,
    indicial_poly,
    semigroup_defect,
    semigroup_sides,
    semigroup_solution,
)
from mlkcalc.specialfn import gamma, miller_ross


def _ab_int_mp(f, a, t):
    """AB integral with B = 1 by quadrature, after u = (t-x)**a removes the kernel singularity."""
    a = mp.mpf(a)
    rl = mp.quad(lambda u: f(max(t - u ** (1 / a), 0)), [0, t**a]) / a
    return (1 - a) * f(t) + a / mp.gamma(a) * rl


def test_sides_for_one_third_against_quadrature():
    it, di = semigroup_sides(SemigroupCase(1 / 3, 1 / 3))
    third = mp.mpf(1) / 3

    def inner(x):
        # AB I^(1/3) t, itself checked against quadrature below
        return 2 * x / 3 + x ** (4 * third) / (3 * mp.gamma(7 * third))

    with mp.workdps(30):
        for t in (0.5, 1.3):
            t = mp.mpf(t)
            assert float(inner(t)) == pytest.approx(float(_ab_int_mp(lambda y: y, third, t)), rel=1e-14)
            assert it(t) == pytest.approx(float(_ab_int_mp(inner, third, t)), rel=1e-12)
            assert di(t) == pytest.approx(float(_ab_int_mp(lambda y: y, 2 * third, t)), rel=1e-12)


def test_sides_coefficients_closed_form():
    it, di = semigroup_sides(SemigroupCase(1 / 3, 1 / 3))
    assert dict((round(e, 9), c) for c, e in di.terms) == pytest.approx(
        {1.0: 1 / 3, round(5 / 3, 9): 2 / (3 * gamma(8 / 3))}, rel=1e-12)
    assert dict((round(e, 9), c) for c, e in it.terms) == pytest.approx(
        {1.0: 4 / 9, round(4 / 3, 9): 4 / (9 * gamma(7 / 3)), round(5 / 3, 9): 1 / (9 * gamma(8 / 3))}, rel=1e-12)


def test_defect_nonzero_and_fie_identity():
    case = SemigroupCase(0.2, 0.5, PowerSum(((1.0, 0.0), (2.0, 1.0))))
    t = np.linspace(0, 2, 9)
    d = semigroup_defect(case)
    assert np.max(np.abs(d(t))) > 1e-3
    np.testing.assert_allclose(fie_residual(case)(t), d(t), atol=1e-14)
    g = Grid(0.0, 2.0, 9)
    np.testing.assert_allclose(semigroup_defect(case, g).values, d(g.t), atol=1e-15)


def test_case_validation():
    with pytest.raises(DomainError):
        SemigroupCase(0.6, 0.5)
    with pytest.raises(ValidationError):
        SemigroupCase(0.2, 0.2, PowerSum.monomial(1.0, base=1.0))


@settings(max_examples=60, deadline=None)
@given(a=st.floats(0.01, 0.99), b=st.floats(0.01, 0.99))
def test_indicial_vanishes_at_one(a, b):
    assert abs(float(indicial_poly(a, b)(1.0))) < 1e-15


@settings(max_examples=60, deadline=None)
@given(a=st.floats(0.01, 0.99), b=st.floats(0.01, 0.99), x=st.floats(0.0, 10.0))
def test_indicial_expanded_equals_factored(a, b, x):
    P = indicial_poly(a, b)
    assert float(P.expanded(x)) == pytest.approx(float(P.factored(x)), rel=1e-12, abs=1e-12)


def test_symmetric_roots_and_derivative():
    P = indicial_poly(0.25)
    y1, y2 = P.roots_y()
    assert (y1, y2) == (1.0, pytest.approx(-7.0))
    assert float(P.in_y(y2)) == pytest.approx(0.0, abs=1e-14)
    h = 1e-6
    assert float(P.derivative_in_y(2.0)) == pytest.approx(float((P.in_y(2 + h) - P.in_y(2 - h)) / (2 * h)), rel=1e-8)
    with pytest.raises(ValidationError):
        indicial_poly(0.2, 0.3).roots_y()
    q, roots = indicial_poly(0.3, 0.6).numeric_roots()
    assert q == 10
    assert np.min(np.abs(roots - 1.0)) < 1e-10


def test_solution_family_is_miller_ross_combination():
    sol = semigroup_solution(3)
    t = 0.7
    direct = sum(c * miller_ross(nu, a, t) for c, nu, a in sol.families())
    assert sol(t) == pytest.approx(direct)
    assert len(sol.families()) == 6
    with pytest.raises(ValidationError):
        semigroup_solution(2)


def test_solution_even_q_overflows():
    # r**q > 0 for even q, so one family grows like exp(r**q t)
    sol = semigroup_solution(4)
    assert np.isfinite(sol(0.1))
    with pytest.raises(OverflowError):
        sol(1.0)


def test_exponential_norm_warns():
    with pytest.warns(NormalizationWarning):
        semigroup_solution(3, norm=ExponentialNorm(0.2) if False else _quiet_norm())


def _quiet_norm():
    import warnings
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        return ExponentialNorm(0.2)


def test_fde_residual_exact_for_power_sum_kernel():
    # the combination annihilates nothing in general; check against the termwise formula
    f = PowerSum.monomial(1.0)
    g = Grid(0.0, 2.0, 5)
    r = fde_residual(f, 0.25, g)
    t = g.t[1:]
    a = 0.25
    ref = (a * a * t ** (1 - 2 * a) / gamma(2 - 2 * a) + 2 * a * (1 - a) * t ** (1 - a) / gamma(2 - a)
           + (a * a - 2 * a) * t)
    np.testing.assert_allclose(r.values[1:], ref, rtol=1e-12)


def test_fde_residual_solution_small():
    r = fde_residual(semigroup_solution(3), 1 / 3, Grid(0.0, 2.0, 2049))
    assert r.max_abs(0.5, 2.0) < 1e-3
    with pytest.raises(DomainError):
        fde_residual(semigroup_solution(3), 0.6, Grid(0.0, 2.0, 9))
